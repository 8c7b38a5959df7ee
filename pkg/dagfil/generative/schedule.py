"""
Schedules: DDPM noise schedule, flow-matching time grid, and forward noising.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

import numpy as np

from ..core.errors import ContractError, ShapeError
from ..numerics import Tensor

# Flow times are scaled by this before the sinusoidal step embedding.
FLOW_TIME_SCALE = 100.0


@dataclass(frozen=True)
class NoiseSchedule:
    """Betas and their cumulative products for an n-step diffusion."""
    betas: np.ndarray
    alphas: np.ndarray = field(init=False)
    alpha_bars: np.ndarray = field(init=False)
    name: str = "linear"

    def __post_init__(self) -> None:
        betas = np.asarray(self.betas, dtype=np.float64)
        if betas.ndim != 1 or betas.size == 0:
            raise ContractError("betas must be a non-empty vector")
        if np.any(betas <= 0.0) or np.any(betas >= 1.0):
            raise ContractError("every beta must lie in (0, 1)")
        alphas = 1.0 - betas
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "alpha_bars", np.cumprod(alphas))

    @classmethod
    def linear(cls, n_steps: int = 50, beta_start: float = 1e-4, beta_end: float = 0.02) -> "NoiseSchedule":
        """Linearly spaced betas."""
        if n_steps <= 0:
            raise ContractError(f"n_steps must be positive, got {n_steps}")
        return cls(betas=np.linspace(beta_start, beta_end, n_steps), name="linear")

    @classmethod
    def from_settings(cls, settings: Any) -> "NoiseSchedule":
        return cls.linear(settings.n_steps, settings.beta_start, settings.beta_end)

    @property
    def n_steps(self) -> int:
        return int(self.betas.size)

    def posterior_variance(self, step: int) -> float:
        """Variance of q(a^{step-1} | a^step, a^0); zero at step 0."""
        if step == 0:
            return 0.0
        return float(self.betas[step] * (1.0 - self.alpha_bars[step - 1]) / (1.0 - self.alpha_bars[step]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "diffusion",
            "schedule": self.name,
            "n_steps": self.n_steps,
            "beta_start": float(self.betas[0]),
            "beta_end": float(self.betas[-1]),
        }


@dataclass(frozen=True)
class FlowConfig:
    """Euler integration grid over [0, 1]."""
    t_grid: np.ndarray

    def __post_init__(self) -> None:
        grid = np.asarray(self.t_grid, dtype=np.float64)
        if grid.ndim != 1 or grid.size < 2:
            raise ContractError("t_grid needs at least two points")
        if grid[0] != 0.0 or grid[-1] != 1.0 or np.any(np.diff(grid) <= 0.0):
            raise ContractError("t_grid must increase strictly from 0 to 1")
        object.__setattr__(self, "t_grid", grid)

    @classmethod
    def uniform(cls, n_euler_steps: int = 10) -> "FlowConfig":
        if n_euler_steps <= 0:
            raise ContractError(f"n_euler_steps must be positive, got {n_euler_steps}")
        return cls(t_grid=np.linspace(0.0, 1.0, n_euler_steps + 1))

    @classmethod
    def from_settings(cls, settings: Any) -> "FlowConfig":
        return cls.uniform(settings.n_euler_steps)

    @property
    def n_euler_steps(self) -> int:
        return int(self.t_grid.size - 1)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "flow", "n_euler_steps": self.n_euler_steps, "t_grid": self.t_grid.tolist()}


Process = Union[NoiseSchedule, FlowConfig]


def process_mode(process: Process) -> str:
    """'diffusion' or 'flow'."""
    return "flow" if isinstance(process, FlowConfig) else "diffusion"


def process_from_dict(data: Optional[Dict[str, Any]]) -> Optional[Process]:
    """Rebuild a process from a checkpoint header entry."""
    if not data:
        return None
    if data.get("kind") == "flow":
        return FlowConfig(t_grid=np.asarray(data["t_grid"], dtype=np.float64))
    return NoiseSchedule.linear(int(data["n_steps"]), float(data["beta_start"]), float(data["beta_end"]))


def _array(x: Union[Tensor, np.ndarray]) -> np.ndarray:
    return x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


def q_sample(
    action0: Union[Tensor, np.ndarray],
    step: Union[int, np.ndarray],
    noise: Union[Tensor, np.ndarray],
    sched: NoiseSchedule,
) -> Tensor:
    """
    Noised action a^η = sqrt(ᾱ_η)·a⁰ + sqrt(1 − ᾱ_η)·ε.

    ``step`` may be a scalar or one step per batch row.

    Raises:
        ContractError: step outside [0, n_steps)
        ShapeError: action and noise shapes differ
    """
    a0, eps = _array(action0), _array(noise)
    if a0.shape != eps.shape:
        raise ShapeError("q_sample: action and noise shapes differ", [a0.shape, eps.shape])
    steps = np.asarray(step)
    if np.any(steps < 0) or np.any(steps >= sched.n_steps):
        raise ContractError(f"diffusion step {step} outside [0, {sched.n_steps})")
    abar = sched.alpha_bars[steps]
    if steps.ndim == 1:
        if a0.ndim != 2 or steps.shape[0] != a0.shape[0]:
            raise ShapeError("q_sample: one step per batch row", [a0.shape, steps.shape])
        abar = abar.reshape(-1, 1)
    return Tensor(np.sqrt(abar) * a0 + np.sqrt(1.0 - abar) * eps)
