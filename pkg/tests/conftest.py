"""Shared fixtures for the dagfil test suite."""

from typing import Optional

import numpy as np
import pytest

from dagfil.core.config import EnvSettings, ModelSettings, OptimizerSettings
from dagfil.data.stats import DatasetStats
from dagfil.data.trajectory import Outcome, Trajectory
from dagfil.envs.arena import obs_dim
from dagfil.models.dag import DagModel


def make_trajectory(
    task_id: str = "pick_place",
    config_id: int = 0,
    seed: int = 0,
    run: int = 0,
    outcome: Outcome = Outcome.SUCCESS,
    steps: int = 5,
    obs_width: int = 4,
    rng: Optional[np.random.Generator] = None,
    **kwargs,
) -> Trajectory:
    """Random trajectory with the given identity."""
    rng = rng or np.random.default_rng(config_id * 7919 + run)
    if outcome == Outcome.CORRECTED and "correction_start" not in kwargs:
        kwargs["correction_start"] = 0
    return Trajectory(
        task_id=task_id,
        config_id=config_id,
        seed=seed,
        run=run,
        observations=rng.uniform(0.0, 1.0, size=(steps, obs_width)),
        actions=rng.uniform(-0.05, 0.05, size=(steps, 3)),
        outcome=outcome,
        **kwargs,
    )


def unit_stats(obs_width: int, action_dim: int = 3) -> DatasetStats:
    """Stats mapping observations from [0, 1] and actions from arena ranges."""
    if action_dim == 3:
        lo, hi = np.array([-0.05, -0.05, 0.0]), np.array([0.05, 0.05, 1.0])
    else:
        lo, hi = -np.ones(action_dim), np.ones(action_dim)
    return DatasetStats.from_arrays(
        np.vstack([lo, hi]),
        np.vstack([np.zeros(obs_width), np.ones(obs_width)]),
        {},
    )


@pytest.fixture
def small_model_settings() -> ModelSettings:
    return ModelSettings(hidden_dim=16, horizon=4, step_embed_dim=8)


@pytest.fixture
def env_settings() -> EnvSettings:
    return EnvSettings(tasks=["reach", "pick_place", "two_object_sequence"])


@pytest.fixture
def fast_optimizer() -> OptimizerSettings:
    return OptimizerSettings(batch_size=32, log_every=10, checkpoint_every=10)


@pytest.fixture
def arena_model(small_model_settings, env_settings) -> DagModel:
    """Untrained model sized for the arena, with statistics attached."""
    width = obs_dim(env_settings)
    model = DagModel(small_model_settings, obs_dim=width, seed=3)
    model.stats = unit_stats(width)
    return model


def randomize_heads(model: DagModel, seed: int = 0) -> DagModel:
    """Give both heads distinct non-zero output layers."""
    rng = np.random.default_rng(seed)
    for head in ("succ", "fail"):
        for p in model.parameters(head):
            p.assign(rng.normal(0.0, 0.3, size=p.shape))
    model.trained_heads.update({"succ", "fail"})
    return model
