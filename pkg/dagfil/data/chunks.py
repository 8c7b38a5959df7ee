"""
Chunks: Training pairs (obs_t, a_{t:t+H}) cut from trajectories.
"""

from dataclasses import dataclass
from typing import Callable, Iterable, Literal
import logging

import numpy as np

from ..core.errors import ContractError, DataError
from .stats import DatasetStats
from .trajectory import Trajectory

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChunkBatch:
    """
    Normalized training rows.

    Attributes:
        obs: (N, obs_dim) normalized observations
        task: (N, task_dim) task one-hots
        actions: (N, d*H) normalized, flattened action chunks
    """
    obs: np.ndarray
    task: np.ndarray
    actions: np.ndarray

    def __post_init__(self) -> None:
        n = self.actions.shape[0]
        if self.obs.shape[0] != n or self.task.shape[0] != n:
            raise ContractError("chunk arrays must share their first dimension")

    def __len__(self) -> int:
        return int(self.actions.shape[0])

    def take(self, indices: np.ndarray) -> "ChunkBatch":
        return ChunkBatch(self.obs[indices], self.task[indices], self.actions[indices])

    def sample(self, rng: np.random.Generator, batch_size: int) -> "ChunkBatch":
        """Random rows with replacement; the whole set when it fits in one batch."""
        if len(self) == 0:
            raise ContractError("cannot sample from an empty chunk set")
        if batch_size >= len(self):
            return self
        return self.take(rng.integers(0, len(self), size=batch_size))


def chunk_actions(actions: np.ndarray, horizon: int) -> np.ndarray:
    """
    One (H, d) chunk per step; chunks running past the end repeat the final
    action.

    Returns:
        (T, H, d) array
    """
    t = actions.shape[0]
    padded = np.concatenate([actions, np.repeat(actions[-1:], horizon - 1, axis=0)], axis=0)
    return np.stack([padded[i: i + horizon] for i in range(t)])


def make_chunks(
    trajectories: Iterable[Trajectory],
    stats: DatasetStats,
    horizon: int,
    task_one_hot: Callable[[str], np.ndarray],
    mode: Literal["full", "post_divergence"] = "full",
) -> ChunkBatch:
    """
    Cut every trajectory into normalized training rows.

    Args:
        trajectories: Source trajectories
        stats: Normalization statistics
        horizon: Chunk length H
        task_one_hot: Maps a task name to its one-hot vector
        mode: ``post_divergence`` keeps only steps from a failure's
            divergence index onward; ``full`` keeps every step

    Raises:
        DataError: no rows were produced
    """
    obs_rows, task_rows, action_rows = [], [], []
    for traj in trajectories:
        if len(traj) == 0:
            continue
        start = 0
        if mode == "post_divergence" and traj.divergence_index is not None:
            start = traj.divergence_index
        chunks = chunk_actions(traj.actions, horizon)[start:]
        obs_rows.append(stats.normalize_obs(traj.observations[start:]))
        action_rows.append(stats.normalize_actions(chunks).reshape(len(chunks), -1))
        task_rows.append(np.repeat(task_one_hot(traj.task_id).reshape(1, -1), len(chunks), axis=0))

    if not action_rows:
        raise DataError("no training chunks produced")
    batch = ChunkBatch(np.concatenate(obs_rows), np.concatenate(task_rows), np.concatenate(action_rows))
    logger.debug(f"Built {len(batch)} chunks (mode={mode})")
    return batch
