"""
Expert: Scripted waypoint policy and its noisy bootstrap variant.

The expert follows the planner's shortest path to the next target (the
active object, then its goal), hitting each waypoint exactly, and spends
one motionless step to grasp or release.
"""

from typing import Optional
import logging
import math

import numpy as np

from ..core.errors import PlanError
from .arena import (
    ACTION_DIM,
    EnvState,
    EpisodeContext,
    Policy,
    TaskId,
    TaskSpec,
    remaining_legs,
    step,
)
from .planner import plan_path

logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 8
_ARRIVED = 1e-9


def expert_action(state: EnvState, spec: TaskSpec) -> np.ndarray:
    """
    Single expert action for the current state.

    Raises:
        PlanError: the next target is unreachable
    """
    cfg = spec.settings
    start, target, carrying = remaining_legs(state, spec)[0]
    grip = 1.0 if state.holding else 0.0
    if math.dist(start, target) <= _ARRIVED:
        if spec.task_id == TaskId.REACH:
            return np.zeros(ACTION_DIM)
        return np.array([0.0, 0.0, 0.0 if carrying else 1.0])

    waypoint = plan_path(start, target, state.traps, cfg.grasp_radius)[1]
    delta = np.array([waypoint[0] - start[0], waypoint[1] - start[1]])
    norm = float(np.hypot(delta[0], delta[1]))
    if norm > cfg.max_step:
        delta *= cfg.max_step / norm
    return np.array([delta[0], delta[1], grip])


def scripted_expert(state: EnvState, spec: TaskSpec, horizon: int = DEFAULT_CHUNK) -> np.ndarray:
    """
    Expert action chunk of shape (horizon, 3).

    The chunk is planned by simulating the expert forward; steps after the
    simulated episode ends hold position with the current grip.
    """
    chunk = np.zeros((horizon, ACTION_DIM))
    sim = state
    for k in range(horizon):
        if sim.terminal:
            chunk[k, 2] = 1.0 if sim.holding else 0.0
            continue
        chunk[k] = expert_action(sim, spec)
        sim, _, _ = step(sim, chunk[k], spec)
    return chunk


class ExpertPolicy:
    """Scripted expert as a rollout policy."""

    def __init__(self, horizon: int = DEFAULT_CHUNK):
        self.horizon = horizon

    def __call__(self, state: EnvState, spec: TaskSpec, ctx: EpisodeContext) -> np.ndarray:
        return scripted_expert(state, spec, self.horizon)


class NoisyExpertPolicy(ExpertPolicy):
    """
    Expert chunks with per-step Gaussian noise on the displacement channels.

    Used to bootstrap failure data before a learned policy exists. When the
    expert cannot plan from a drifted state the agent holds still.
    """

    def __init__(self, sigma: float = 0.04, horizon: int = DEFAULT_CHUNK):
        super().__init__(horizon)
        self.sigma = sigma

    def __call__(self, state: EnvState, spec: TaskSpec, ctx: EpisodeContext) -> np.ndarray:
        try:
            chunk = scripted_expert(state, spec, self.horizon)
        except PlanError as e:
            logger.debug(f"Noisy expert stalled: {e}")
            chunk = np.zeros((self.horizon, ACTION_DIM))
            chunk[:, 2] = 1.0 if state.holding else 0.0
        chunk[:, :2] += ctx.rng.normal(0.0, self.sigma, size=(self.horizon, 2))
        return chunk


def noisy_expert_policy(sigma: float = 0.04, horizon: int = DEFAULT_CHUNK) -> Policy:
    """Bootstrap failure generator: scripted expert plus action noise."""
    return NoisyExpertPolicy(sigma, horizon)


def expert_policy(horizon: Optional[int] = None) -> Policy:
    return ExpertPolicy(horizon or DEFAULT_CHUNK)
