"""
Optimizer: Bias-corrected Adam.

``adam_step`` is the pure update rule; ``Adam`` applies it to a set of
``Parameter`` tensors, keeping one ``AdamState`` per parameter so that a
parameter which received no gradient in a step is left untouched.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Sequence, Tuple
import logging

import numpy as np

from ..core.errors import ContractError, ShapeError
from .tensor import Parameter

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdamState:
    """Moment estimates and hyperparameters for a group of arrays."""
    step: int = 0
    m: Tuple[np.ndarray, ...] = field(default_factory=tuple)
    v: Tuple[np.ndarray, ...] = field(default_factory=tuple)
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(
        cls,
        params: Sequence[np.ndarray],
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> "AdamState":
        """Fresh state with zeroed moments shadowing params."""
        return cls(
            step=0,
            m=tuple(np.zeros_like(p, dtype=np.float64) for p in params),
            v=tuple(np.zeros_like(p, dtype=np.float64) for p in params),
            lr=lr,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
        )


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
) -> Tuple[List[np.ndarray], AdamState]:
    """
    Apply one bias-corrected Adam update.

    Args:
        params: Current parameter arrays
        grads: Gradients, one per parameter
        state: Moments shadowing params

    Returns:
        New parameter arrays and the advanced state

    Raises:
        ShapeError: parameter/gradient/moment counts or shapes disagree
        ContractError: non-positive learning rate
    """
    if state.lr <= 0:
        raise ContractError(f"learning rate must be positive, got {state.lr}")
    if not (len(params) == len(grads) == len(state.m) == len(state.v)):
        raise ShapeError(
            f"adam_step: {len(params)} params, {len(grads)} grads, "
            f"{len(state.m)}/{len(state.v)} moments"
        )

    step = state.step + 1
    bias1 = 1.0 - state.beta1**step
    bias2 = 1.0 - state.beta2**step

    new_params: List[np.ndarray] = []
    new_m: List[np.ndarray] = []
    new_v: List[np.ndarray] = []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if not (p.shape == g.shape == m.shape == v.shape):
            raise ShapeError("adam_step: shape mismatch", [p.shape, g.shape, m.shape, v.shape])
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        m_hat = m / bias1
        v_hat = v / bias2
        new_params.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(m)
        new_v.append(v)

    return new_params, replace(state, step=step, m=tuple(new_m), v=tuple(new_v))


class Adam:
    """Adam over named parameters."""

    def __init__(
        self,
        params: Sequence[Parameter],
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        if lr <= 0:
            raise ContractError(f"learning rate must be positive, got {lr}")
        self.params = list(params)
        self.states: Dict[str, AdamState] = {
            p.name: AdamState.zeros_like([p.data], lr=lr, beta1=beta1, beta2=beta2, eps=eps)
            for p in self.params
        }

    def step(self) -> int:
        """
        Update every parameter that holds a gradient.

        Returns:
            Number of parameters updated
        """
        updated = 0
        for p in self.params:
            if p.grad is None:
                continue
            new, self.states[p.name] = adam_step([p.data], [p.grad], self.states[p.name])
            p.assign(new[0])
            updated += 1
        return updated

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()
