"""
Trajectory: Executed (observation, action) sequences with outcome labels.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from ..core.errors import ContractError, ShapeError


class Outcome(str, Enum):
    """Trajectory label."""
    SUCCESS = "success"
    FAILURE = "failure"
    CORRECTED = "corrected"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    One episode.

    ``observations[t]`` is the observation before ``actions[t]`` was
    executed. Corrected trajectories record where the planner took over in
    ``correction_start``; raw failures that were corrected record the same
    index as ``divergence_index``.
    """
    task_id: str
    config_id: int
    seed: int
    run: int
    observations: np.ndarray
    actions: np.ndarray
    outcome: Outcome
    correction_start: Optional[int] = None
    divergence_index: Optional[int] = None
    lambda_log: Optional[Tuple[float, ...]] = None
    numeric_fault: bool = False

    def __post_init__(self) -> None:
        obs = np.asarray(self.observations, dtype=np.float64)
        act = np.asarray(self.actions, dtype=np.float64)
        if obs.ndim != 2 or act.ndim != 2 or obs.shape[0] != act.shape[0]:
            raise ShapeError("observations and actions must be aligned 2-D arrays", [obs.shape, act.shape])
        if obs.shape[0] == 0 and not self.numeric_fault:
            raise ContractError(f"trajectory {self.uid} has no steps")
        outcome = Outcome(self.outcome)
        if outcome == Outcome.CORRECTED:
            if self.correction_start is None or not 0 <= self.correction_start < obs.shape[0]:
                raise ContractError(f"corrected trajectory {self.uid} needs correction_start in [0, {obs.shape[0]})")
        elif self.correction_start is not None:
            raise ContractError(f"only corrected trajectories carry correction_start ({self.uid})")
        obs.setflags(write=False)
        act.setflags(write=False)
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "actions", act)
        object.__setattr__(self, "outcome", outcome)
        if self.lambda_log is not None:
            object.__setattr__(self, "lambda_log", tuple(float(x) for x in self.lambda_log))

    @property
    def uid(self) -> str:
        """Identity ``task:config:seed:run:outcome``."""
        return f"{self.task_id}:{self.config_id}:{self.seed}:{self.run}:{Outcome(self.outcome).value}"

    @property
    def steps(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        return list(zip(self.observations, self.actions))

    @property
    def mean_lambda(self) -> float:
        if not self.lambda_log:
            return 0.0
        return float(np.mean(self.lambda_log))

    def __len__(self) -> int:
        return int(self.actions.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.uid == other.uid
            and self.correction_start == other.correction_start
            and self.divergence_index == other.divergence_index
            and self.lambda_log == other.lambda_log
            and self.numeric_fault == other.numeric_fault
            and self.observations.shape == other.observations.shape
            and self.actions.shape == other.actions.shape
            and self.observations.tobytes() == other.observations.tobytes()
            and self.actions.tobytes() == other.actions.tobytes()
        )

    def __hash__(self) -> int:
        return hash(self.uid)

    def with_divergence(self, index: int) -> "Trajectory":
        return replace(self, divergence_index=index)
