"""
Collection: Roll policies out over configs × runs and label the results.

Every episode draws from its own generator seeded by
``(seed, task, config_id, run)``, so results do not depend on worker count
or scheduling, and two policies rolled out with the same seed see the same
random streams.
"""

from typing import Any, List, Optional, Sequence, Tuple
import asyncio
import logging

import numpy as np

from ..envs.arena import (
    ACTION_DIM,
    TASK_CODES,
    EpisodeContext,
    Policy,
    StepOutcome,
    TaskSpec,
    execute,
    obs_dim,
    reset,
)
from .trajectory import Outcome, Trajectory

logger = logging.getLogger(__name__)

Job = Tuple[int, int]


def episode_rng(seed: int, spec: TaskSpec, config_id: int, run: int) -> np.random.Generator:
    """Generator for one (seed, task, config, run) episode."""
    return np.random.default_rng([int(seed), TASK_CODES[spec.task_id], int(config_id), int(run)])


def run_episode(
    policy: Policy, spec: TaskSpec, config_id: int, run: int, seed: int
) -> Tuple[Trajectory, List[Any]]:
    """Roll out one episode; returns the labeled trajectory and its guidance trace."""
    ctx = EpisodeContext(rng=episode_rng(seed, spec, config_id, run))
    episode = execute(reset(spec, config_id, run), spec, policy, ctx)
    lambdas = [record.lam for record in ctx.trace if hasattr(record, "lam")]
    return Trajectory(
        task_id=spec.name,
        config_id=config_id,
        seed=seed,
        run=run,
        observations=np.asarray(episode.observations).reshape(-1, obs_dim(spec.settings)),
        actions=np.asarray(episode.actions).reshape(-1, ACTION_DIM),
        outcome=Outcome.SUCCESS if episode.outcome == StepOutcome.SUCCESS else Outcome.FAILURE,
        lambda_log=tuple(lambdas) if lambdas else None,
        numeric_fault=episode.numeric_fault,
    ), ctx.trace


def _jobs(n_configs: int, n_runs: int, config_offset: int) -> List[Job]:
    return [(config_offset + c, r) for c in range(n_configs) for r in range(n_runs)]


async def collect_rollouts_async(
    policy: Policy,
    spec: TaskSpec,
    n_configs: int,
    n_runs: int,
    seed: int,
    config_offset: int = 0,
    workers: int = 1,
    traces: Optional[dict] = None,
) -> List[Trajectory]:
    """Async variant of :func:`collect_rollouts`; episodes run in worker threads."""
    semaphore = asyncio.Semaphore(max(1, workers))

    async def one(job: Job):
        async with semaphore:
            return await asyncio.to_thread(run_episode, policy, spec, job[0], job[1], seed)

    results = await asyncio.gather(*(one(job) for job in _jobs(n_configs, n_runs, config_offset)))
    return _finish(results, spec, traces)


def collect_rollouts(
    policy: Policy,
    spec: TaskSpec,
    n_configs: int,
    n_runs: int,
    seed: int,
    config_offset: int = 0,
    workers: int = 1,
    traces: Optional[dict] = None,
) -> List[Trajectory]:
    """
    Roll out ``n_configs × n_runs`` episodes.

    Args:
        policy: Maps (state, task spec, episode context) to an action chunk
        spec: Task to roll out
        n_configs: Number of consecutive config ids
        n_runs: Runs per config
        seed: Seed shared by every episode's generator
        config_offset: First config id
        workers: Worker threads; 1 runs inline
        traces: When given, filled with ``uid -> guidance records``

    Returns:
        Trajectories ordered by (config_id, run)
    """
    if workers > 1:
        return asyncio.run(
            collect_rollouts_async(policy, spec, n_configs, n_runs, seed, config_offset, workers, traces)
        )
    results = [run_episode(policy, spec, c, r, seed) for c, r in _jobs(n_configs, n_runs, config_offset)]
    return _finish(results, spec, traces)


def _finish(results: Sequence[tuple], spec: TaskSpec, traces: Optional[dict]) -> List[Trajectory]:
    trajectories = []
    for traj, trace in results:
        trajectories.append(traj)
        if traces is not None and trace:
            traces[traj.uid] = list(trace)
    faults = sum(t.numeric_fault for t in trajectories)
    successes = sum(t.outcome == Outcome.SUCCESS for t in trajectories)
    logger.info(f"Collected {len(trajectories)} {spec.name} episodes: {successes} successes, {faults} numeric faults")
    return trajectories
