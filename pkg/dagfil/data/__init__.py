"""Trajectories, dataset assembly, normalization statistics and persistence."""

from .stats import DatasetStats
from .trajectory import Outcome, Trajectory
from .chunks import ChunkBatch, chunk_actions, make_chunks
from .datasets import Datasets, build_datasets, compute_stats
from .persistence import load_dataset, save_dataset
from .collection import collect_rollouts, collect_rollouts_async, episode_rng, run_episode

__all__ = [
    "DatasetStats",
    "Outcome",
    "Trajectory",
    "ChunkBatch",
    "chunk_actions",
    "make_chunks",
    "Datasets",
    "build_datasets",
    "compute_stats",
    "load_dataset",
    "save_dataset",
    "collect_rollouts",
    "collect_rollouts_async",
    "episode_rng",
    "run_episode",
]
