"""
Evaluation: Paired rollouts of policies over a config × run block.

Every arm evaluated with the same seed sees the same initial states and the
same per-episode random streams, so arm comparisons are paired.
"""

from collections import OrderedDict
from typing import Dict, List, Mapping, Optional, Sequence, Union
import asyncio
import logging

from ..data.collection import collect_rollouts, collect_rollouts_async
from ..data.trajectory import Outcome, Trajectory
from ..envs.arena import Policy, TaskSpec
from ..guidance.spec import GuidanceSpec
from ..models.dag import DagModel
from .policies import ModelPolicy
from .schemas import EpisodeResult, SummaryRow

logger = logging.getLogger(__name__)


def _as_policy(target: Union[DagModel, Policy], guidance: Optional[GuidanceSpec], clip: Optional[float]) -> Policy:
    if isinstance(target, DagModel):
        return ModelPolicy(target, guidance, clip=clip)
    return target


def to_results(trajectories: Sequence[Trajectory], arm: str) -> List[EpisodeResult]:
    """Episode rows; corrected labels never occur at evaluation time."""
    return [
        EpisodeResult(
            task=t.task_id,
            arm=arm,
            config_id=t.config_id,
            run=t.run,
            seed=t.seed,
            outcome="success" if t.outcome == Outcome.SUCCESS else "failure",
            steps=len(t),
            mean_lambda=t.mean_lambda,
            numeric_fault=t.numeric_fault,
        )
        for t in trajectories
    ]


def evaluate(
    target: Union[DagModel, Policy],
    tasks: Sequence[TaskSpec],
    n_configs: int,
    n_runs: int,
    seed: int,
    arm: str = "eval",
    guidance: Optional[GuidanceSpec] = None,
    config_offset: int = 0,
    clip: Optional[float] = 3.0,
    workers: int = 1,
    traces: Optional[Dict[str, list]] = None,
) -> List[EpisodeResult]:
    """
    Evaluate a model under a guidance spec, or any rollout policy.

    Args:
        target: DagModel (wrapped with ``guidance``) or a policy callable
        tasks: Tasks to evaluate, in report order
        n_configs: Configs per task
        n_runs: Runs per config
        seed: Seed of every episode generator (shared across arms)
        arm: Label written into each row
        traces: Optional sink for per-episode guidance records keyed by uid

    Raises:
        ConfigError: guidance incompatible with the model
    """
    policy = _as_policy(target, guidance, clip)
    rows: List[EpisodeResult] = []
    for spec in tasks:
        trajs = collect_rollouts(policy, spec, n_configs, n_runs, seed, config_offset, workers, traces)
        rows.extend(to_results(trajs, arm))
    return rows


async def evaluate_arms(
    policies: Mapping[str, Policy],
    tasks: Sequence[TaskSpec],
    n_configs: int,
    n_runs: int,
    seed: int,
    config_offset: int = 0,
    workers: int = 1,
    traces: Optional[Dict[str, Dict[str, list]]] = None,
) -> Dict[str, List[EpisodeResult]]:
    """Evaluate several arms concurrently; rows are returned per arm in input order."""

    async def one(arm: str, policy: Policy) -> List[EpisodeResult]:
        sink = traces.setdefault(arm, {}) if traces is not None else None
        rows: List[EpisodeResult] = []
        for spec in tasks:
            trajs = await collect_rollouts_async(policy, spec, n_configs, n_runs, seed, config_offset, workers, sink)
            rows.extend(to_results(trajs, arm))
        logger.info(f"Arm {arm}: {summary_line(rows)}")
        return rows

    arms = list(policies.items())
    results = await asyncio.gather(*(one(arm, policy) for arm, policy in arms))
    return OrderedDict((arm, rows) for (arm, _), rows in zip(arms, results))


def success_rates(rows: Sequence[EpisodeResult]) -> List[SummaryRow]:
    """Per (seed, task, arm) success percentage, in order of first appearance."""
    groups: "OrderedDict[tuple, List[EpisodeResult]]" = OrderedDict()
    for row in rows:
        groups.setdefault((row.seed, row.task, row.arm), []).append(row)
    return [
        SummaryRow(
            task=task,
            arm=arm,
            success_rate_pct=100.0 * sum(r.outcome == "success" for r in group) / len(group),
            n_episodes=len(group),
            seed=seed,
        )
        for (seed, task, arm), group in groups.items()
    ]


def summary_line(rows: Sequence[EpisodeResult]) -> str:
    return ", ".join(f"{s.task}={s.success_rate_pct:.1f}%" for s in success_rates(rows))
