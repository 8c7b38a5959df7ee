"""
Gradient check: compare reverse-mode gradients against central differences.
"""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor, backward


@dataclass
class GradCheckResult:
    """Worst-case disagreement across all checked entries."""
    max_abs_error: float
    max_rel_error: float
    passed: bool


def numerical_gradient(fn: Callable[[], Tensor], x: Tensor, h: float = 1e-5) -> np.ndarray:
    """
    Central-difference gradient of a scalar function with respect to x.

    ``fn`` must rebuild its result from ``x.data`` on every call.
    """
    original = x.data
    grad = np.zeros(original.shape, dtype=np.float64)
    flat = original.reshape(-1)
    try:
        for i in range(flat.size):
            bumped = flat.copy()
            bumped[i] = flat[i] + h
            x.data = bumped.reshape(original.shape)
            plus = fn().item()
            bumped[i] = flat[i] - h
            x.data = bumped.reshape(original.shape)
            minus = fn().item()
            grad.reshape(-1)[i] = (plus - minus) / (2.0 * h)
    finally:
        x.data = original
    return grad


def check_gradients(
    fn: Callable[[], Tensor],
    inputs: Sequence[Tensor],
    h: float = 1e-5,
    rtol: float = 1e-4,
    atol: float = 1e-7,
) -> GradCheckResult:
    """
    Check every gradient entry of ``fn`` with respect to ``inputs``.

    An entry passes when its absolute error is below ``atol`` or its
    relative error is below ``rtol``.
    """
    for x in inputs:
        x.zero_grad()
    backward(fn())

    max_abs = 0.0
    max_rel = 0.0
    passed = True
    for x in inputs:
        analytic = x.grad if x.grad is not None else np.zeros(x.shape)
        numeric = numerical_gradient(fn, x, h)
        abs_err = np.abs(analytic - numeric)
        scale = np.maximum(np.abs(analytic), np.abs(numeric))
        rel_err = np.where(scale > 0, abs_err / np.where(scale > 0, scale, 1.0), 0.0)
        ok = (abs_err <= atol) | (rel_err <= rtol)
        passed = passed and bool(np.all(ok))
        max_abs = max(max_abs, float(abs_err.max(initial=0.0)))
        max_rel = max(max_rel, float(np.where(abs_err <= atol, 0.0, rel_err).max(initial=0.0)))

    return GradCheckResult(max_abs_error=max_abs, max_rel_error=max_rel, passed=passed)
