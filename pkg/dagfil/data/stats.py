"""
Dataset Stats: Normalization statistics for actions and observations.

Actions and observations are mapped per dimension to [-1, 1] using the
dataset min/max. Sums use exactly-rounded accumulation, so statistics do
not depend on the order of the records they were computed from.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Mapping
import math

import numpy as np

from ..core.errors import DataError, ShapeError

# Constant dimensions are widened by this much on each side.
DEGENERATE_PAD = 0.5


def _exact_mean(column: np.ndarray) -> float:
    return math.fsum(column.tolist()) / column.size


def _exact_std(column: np.ndarray, mean: float) -> float:
    return math.sqrt(math.fsum(((column - mean) ** 2).tolist()) / column.size)


def _widen(lo: np.ndarray, hi: np.ndarray) -> tuple:
    lo = lo.astype(np.float64).copy()
    hi = hi.astype(np.float64).copy()
    flat = hi - lo <= 1e-12
    lo[flat] -= DEGENERATE_PAD
    hi[flat] += DEGENERATE_PAD
    return lo, hi


@dataclass
class DatasetStats:
    """Per-dimension ranges and moments plus outcome counts."""
    action_min: np.ndarray
    action_max: np.ndarray
    obs_min: np.ndarray
    obs_max: np.ndarray
    obs_mean: np.ndarray
    obs_std: np.ndarray
    counts: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if np.any(self.action_min >= self.action_max) or np.any(self.obs_min >= self.obs_max):
            raise DataError("stats require min < max in every dimension")

    @classmethod
    def from_arrays(
        cls,
        actions: np.ndarray,
        observations: np.ndarray,
        counts: Mapping[str, int],
    ) -> "DatasetStats":
        """
        Compute statistics from stacked per-step arrays.

        Args:
            actions: (N, d) executed actions
            observations: (N, obs_dim) observations
            counts: trajectory counts per outcome label
        """
        if actions.ndim != 2 or observations.ndim != 2 or len(actions) == 0:
            raise ShapeError("stats need non-empty 2-D arrays", [actions.shape, observations.shape])
        a_lo, a_hi = _widen(actions.min(axis=0), actions.max(axis=0))
        o_lo, o_hi = _widen(observations.min(axis=0), observations.max(axis=0))
        means = np.array([_exact_mean(observations[:, j]) for j in range(observations.shape[1])])
        stds = np.array(
            [_exact_std(observations[:, j], means[j]) for j in range(observations.shape[1])]
        )
        return cls(
            action_min=a_lo,
            action_max=a_hi,
            obs_min=o_lo,
            obs_max=o_hi,
            obs_mean=means,
            obs_std=stds,
            counts=dict(sorted(counts.items())),
        )

    @property
    def action_dim(self) -> int:
        return int(self.action_min.size)

    @property
    def obs_dim(self) -> int:
        return int(self.obs_min.size)

    def normalize_actions(self, actions: np.ndarray) -> np.ndarray:
        """Map actions (..., d) to [-1, 1]."""
        return 2.0 * (actions - self.action_min) / (self.action_max - self.action_min) - 1.0

    def denormalize_actions(self, actions: np.ndarray) -> np.ndarray:
        """Inverse of normalize_actions."""
        return (actions + 1.0) * 0.5 * (self.action_max - self.action_min) + self.action_min

    def normalize_obs(self, observations: np.ndarray) -> np.ndarray:
        """Map observations (..., obs_dim) to [-1, 1], clipping out-of-range values."""
        scaled = 2.0 * (observations - self.obs_min) / (self.obs_max - self.obs_min) - 1.0
        return np.clip(scaled, -1.0, 1.0)

    def to_arrays(self) -> Dict[str, np.ndarray]:
        return {
            "action_min": self.action_min,
            "action_max": self.action_max,
            "obs_min": self.obs_min,
            "obs_max": self.obs_max,
            "obs_mean": self.obs_mean,
            "obs_std": self.obs_std,
        }

    @classmethod
    def from_arrays_dict(cls, arrays: Mapping[str, np.ndarray], counts: Mapping[str, int]) -> "DatasetStats":
        return cls(**{k: np.array(arrays[k], dtype=np.float64) for k in cls._array_fields()}, counts=dict(counts))

    @staticmethod
    def _array_fields() -> tuple:
        return ("action_min", "action_max", "obs_min", "obs_max", "obs_mean", "obs_std")

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {k: v.tolist() for k, v in self.to_arrays().items()}
        out["counts"] = dict(self.counts)
        return out
