"""
Combiners: Pure score/velocity combination rules.

Every combiner is affine in its vector arguments with scalar coefficients.
Inputs may be Tensors or arrays; outputs are Tensors.
"""

from typing import Union

import numpy as np

from ..core.errors import ShapeError
from ..numerics import Tensor

Vector = Union[Tensor, np.ndarray]


def _pair(op: str, a: Vector, b: Vector) -> tuple:
    x = a.data if isinstance(a, Tensor) else np.asarray(a, dtype=np.float64)
    y = b.data if isinstance(b, Tensor) else np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeError(f"{op}: operands differ in shape", [x.shape, y.shape])
    return x, y


def cfg_combine(s_uncond: Vector, s_cond: Vector, lam: float) -> Tensor:
    """Classifier-free guidance: s_uc + λ·(s_c − s_uc)."""
    uc, c = _pair("cfg_combine", s_uncond, s_cond)
    return Tensor(uc + lam * (c - uc))


def np_combine(s_uncond: Vector, s_neg: Vector, lam: float) -> Tensor:
    """
    Negative-prompt combination s_uc + λ·(s_neg − s_uc).

    The sign follows the published form, which moves toward the negative
    branch; callers wanting repulsion pass the branches accordingly.
    """
    uc, neg = _pair("np_combine", s_uncond, s_neg)
    return Tensor(uc + lam * (neg - uc))


def fi_combine_static(eps_succ: Vector, eps_fail: Vector, lam: float) -> Tensor:
    """Failure-informed extrapolation ε_s − λ·(ε_f − ε_s)."""
    s, f = _pair("fi_combine_static", eps_succ, eps_fail)
    return Tensor(s - lam * (f - s))


def cosine(eps_succ: Vector, eps_fail: Vector, cos_floor: float = 1e-8) -> float:
    """
    Cosine similarity over the flattened chunk.

    Returns 1.0 when either norm falls below ``cos_floor`` so the adaptive
    scale vanishes.
    """
    s, f = _pair("cosine", eps_succ, eps_fail)
    s, f = s.reshape(-1), f.reshape(-1)
    ns, nf = float(np.linalg.norm(s)), float(np.linalg.norm(f))
    if ns < cos_floor or nf < cos_floor:
        return 1.0
    return float(np.clip(np.dot(s, f) / (ns * nf), -1.0, 1.0))


def adaptive_lambda(eps_succ: Vector, eps_fail: Vector, alpha: float, cos_floor: float = 1e-8) -> float:
    """λ̂ = α·(1 − cos(ε_s, ε_f)), in [0, 2α]."""
    return float(alpha * (1.0 - cosine(eps_succ, eps_fail, cos_floor)))


def fi_combine_adaptive(eps_succ: Vector, eps_fail: Vector, alpha: float, cos_floor: float = 1e-8) -> Tensor:
    """Failure-informed extrapolation with the cosine-adaptive scale."""
    return fi_combine_static(eps_succ, eps_fail, adaptive_lambda(eps_succ, eps_fail, alpha, cos_floor))


def fi_combine_hat(eps_succ: Vector, eps_fail: Vector, lam_hat: float) -> Tensor:
    """
    Alternate form ε_s − λ̂·ε_f.

    Not equivalent to fi_combine_static for a shared scale; kept for
    debugging and never selected by a GuidanceSpec.
    """
    s, f = _pair("fi_combine_hat", eps_succ, eps_fail)
    return Tensor(s - lam_hat * f)
