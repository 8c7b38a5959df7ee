"""
Datasets: Assemble the disjoint success (D_s) and failure (D_f) splits.

Successes and corrected trajectories form D_s; raw failures form D_f.
Normalization statistics are computed over both splits together.
"""

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence
import logging

import numpy as np

from ..core.config import DatasetSizes
from ..core.errors import DataError
from .stats import DatasetStats
from .trajectory import Outcome, Trajectory

logger = logging.getLogger(__name__)


@dataclass
class Datasets:
    """The two training splits and their shared statistics."""
    success: List[Trajectory]
    failure: List[Trajectory]
    stats: DatasetStats

    @property
    def counts(self) -> dict:
        return dict(self.stats.counts)


def compute_stats(trajectories: Sequence[Trajectory]) -> DatasetStats:
    """
    Statistics over every executed step.

    Raises:
        DataError: no steps to compute from
    """
    steps = [t for t in trajectories if len(t)]
    if not steps:
        raise DataError("cannot compute statistics from empty trajectories")
    actions = np.concatenate([t.actions for t in steps])
    observations = np.concatenate([t.observations for t in steps])
    counts = Counter(t.outcome.value for t in trajectories)
    return DatasetStats.from_arrays(actions, observations, counts)


def _capped(trajs: List[Trajectory], cap: Optional[int]) -> List[Trajectory]:
    ordered = sorted(trajs, key=lambda t: t.uid)
    return ordered if cap is None else ordered[:cap]


def build_datasets(
    trajectories: Iterable[Trajectory],
    sizes: Optional[DatasetSizes] = None,
    failure_source: Optional[Callable[[], List[Trajectory]]] = None,
) -> Datasets:
    """
    Split labeled trajectories into D_s and D_f.

    Args:
        trajectories: Labeled trajectories
        sizes: Optional per-label caps (``max_success``, ``max_corrected``,
            ``max_failure``); capped lists keep the lowest uids
        failure_source: Called for failures when the input has none

    Raises:
        DataError: a split is empty, or a uid lands in both splits
    """
    by_label = {label: [] for label in Outcome}
    for traj in trajectories:
        by_label[traj.outcome].append(traj)

    if not by_label[Outcome.FAILURE] and failure_source is not None:
        extra = [t for t in failure_source() if t.outcome == Outcome.FAILURE]
        logger.info(f"No raw failures in input; bootstrap generator supplied {len(extra)}")
        by_label[Outcome.FAILURE].extend(extra)

    sizes = sizes or DatasetSizes()
    success = _capped(by_label[Outcome.SUCCESS], sizes.max_success) + _capped(
        by_label[Outcome.CORRECTED], sizes.max_corrected
    )
    failure = _capped(by_label[Outcome.FAILURE], sizes.max_failure)

    if not success:
        raise DataError("success split D_s is empty", split="success")
    if not failure:
        raise DataError("failure split D_f is empty", split="failure")

    shared = {t.uid for t in success} & {t.uid for t in failure}
    if shared:
        raise DataError(f"{len(shared)} trajectories appear in both splits", split="failure")

    stats = compute_stats(success + failure)
    logger.info(f"Built datasets: D_s={len(success)} D_f={len(failure)} counts={stats.counts}")
    return Datasets(success=success, failure=failure, stats=stats)
