"""
Pipeline: The staged experiment from demonstrations to paired evaluation.

Per training seed:
    1. expert demonstrations (plus noisy-expert rollouts) on the training block
    2. success-only training                       -> success_only.npz
    3. failure rollouts of the success-only policy and replanned corrections
    4. fine-tuning on successes and corrections    -> success_correction.npz
    5. joint dual-head training, fresh failure head -> dag.npz
    6. paired evaluation of every configured arm on the evaluation block

A failing stage stops the run; the report keeps the rows of evaluations
that completed and names the stage that failed.
"""

from typing import Dict, List, Optional, Tuple
from pathlib import Path
import asyncio
import logging

import numpy as np

from ..core.config import RunConfig, Settings, get_settings
from ..core.errors import ContractError, DagfilError, NoCorrection, PipelineError
from ..data.chunks import ChunkBatch, make_chunks
from ..data.collection import collect_rollouts
from ..data.datasets import Datasets, build_datasets, compute_stats
from ..data.persistence import load_dataset, save_dataset
from ..data.trajectory import Outcome, Trajectory
from ..envs.arena import TaskSpec, make_task_spec, obs_dim
from ..envs.correction import replan_correction
from ..envs.expert import ExpertPolicy, NoisyExpertPolicy
from ..generative.schedule import FlowConfig, NoiseSchedule, Process
from ..harness.evaluation import evaluate_arms, success_rates
from ..harness.policies import ModelPolicy
from ..harness.reporting import aggregate_seeds, write_results, write_traces
from ..harness.schemas import EpisodeResult, PipelineReport
from ..models.checkpoint import load_checkpoint
from ..models.dag import DagModel, task_one_hot
from .trainer import train_dag, train_success_only

logger = logging.getLogger(__name__)

CHECKPOINTS = {"success_only": "success_only.npz", "success_correction": "success_correction.npz", "dag": "dag.npz"}
TRAIN_STAGES = ("success", "correction", "dag")


def make_process(config: RunConfig) -> Process:
    """Generative process for the configured mode."""
    if config.model.mode == "flow":
        return FlowConfig.from_settings(config.flow)
    return NoiseSchedule.from_settings(config.diffusion)


class Pipeline:
    """Runs the stages for every configured seed and writes the artifacts."""

    def __init__(self, config: RunConfig, settings: Optional[Settings] = None):
        self.config = config
        self.settings = settings or get_settings()
        self.out_dir = config.resolve_output_dir(self.settings)
        self.workers = self.settings.workers
        self.process = make_process(config)
        train_env = config.env.model_copy(update={"ood": False})
        self.train_tasks: List[TaskSpec] = [make_task_spec(name, train_env) for name in train_env.tasks]
        self.eval_tasks: List[TaskSpec] = [make_task_spec(name, config.env) for name in config.env.tasks]
        self.obs_dim = obs_dim(config.env)
        self.stage = "start"

    def seed_dir(self, seed: int) -> Path:
        return self.out_dir / f"seed_{seed}"

    def checkpoint_path(self, seed: int, name: str) -> Path:
        return self.seed_dir(seed) / "checkpoints" / CHECKPOINTS[name]

    def dataset_path(self, seed: int, name: str) -> Path:
        return self.seed_dir(seed) / "datasets" / f"{name}.jsonl"

    def _one_hot(self, task_name: str) -> np.ndarray:
        return task_one_hot(self.config.env.tasks.index(task_name), self.config.model.task_dim)

    def _chunks(self, trajs: List[Trajectory], model: DagModel, mode: str = "full") -> ChunkBatch:
        return make_chunks(trajs, model.stats, self.config.model.horizon, self._one_hot, mode)

    def _enter(self, seed: int, stage: str) -> None:
        self.stage = stage
        logger.info(f"[seed {seed}] stage {stage}")

    # Stage 1 and 2

    def collect_demonstrations(self, seed: int) -> Tuple[List[Trajectory], List[Trajectory]]:
        """Expert demonstrations and noisy-expert rollouts on the training block."""
        self._enter(seed, "demonstrations")
        sizes, horizon = self.config.data, self.config.model.horizon
        demos: List[Trajectory] = []
        noisy: List[Trajectory] = []
        for spec in self.train_tasks:
            args = (spec, sizes.demo_configs, 1, seed, self.config.train_config_offset, self.workers)
            demos.extend(collect_rollouts(ExpertPolicy(horizon), *args))
            noisy.extend(collect_rollouts(NoisyExpertPolicy(sizes.bootstrap_noise, horizon), *args))
        failed = [t.uid for t in demos if t.outcome != Outcome.SUCCESS]
        if failed:
            raise ContractError(f"expert failed on {len(failed)} training configs, e.g. {failed[0]}")
        save_dataset(demos, self.dataset_path(seed, "demonstrations"))
        save_dataset(noisy, self.dataset_path(seed, "bootstrap"))
        return demos, noisy

    def train_success_stage(self, seed: int, demos: List[Trajectory], noisy: List[Trajectory]) -> DagModel:
        self._enter(seed, "success_only")
        model = DagModel(self.config.model, obs_dim=self.obs_dim, seed=seed)
        model.stats = compute_stats(demos + noisy)
        train_success_only(
            self._chunks(demos, model),
            model,
            self.process,
            self.config.optimizer,
            seed=seed,
            checkpoint_path=self.checkpoint_path(seed, "success_only"),
        )
        return model

    # Stage 3 and 4

    def collect_failures(
        self, seed: int, model: DagModel, demos: List[Trajectory], noisy: List[Trajectory]
    ) -> Datasets:
        """Roll out the success-only policy, correct its failures and assemble D_s / D_f."""
        self._enter(seed, "failures")
        sizes = self.config.data
        policy = ModelPolicy(model, process=self.process, clip=self.config.evaluation.clip)
        raw: List[Trajectory] = []
        for spec in self.train_tasks:
            rollouts = collect_rollouts(
                policy,
                spec,
                sizes.failure_configs,
                sizes.failure_runs,
                seed,
                self.config.train_config_offset,
                self.workers,
            )
            raw.extend(t for t in rollouts if t.outcome == Outcome.FAILURE)
        if not raw:
            logger.warning(f"[seed {seed}] success-only policy produced no failures; using noisy-expert failures")
            raw = [t for t in noisy if t.outcome == Outcome.FAILURE]

        specs = {spec.name: spec for spec in self.train_tasks}
        corrected: List[Trajectory] = []
        failures: List[Trajectory] = []
        for traj in raw:
            try:
                fixed = replan_correction(traj, specs[traj.task_id], self.config.model.horizon)
            except NoCorrection as e:
                logger.debug(f"Keeping raw failure only: {e}")
                failures.append(traj)
                continue
            corrected.append(fixed)
            failures.append(traj.with_divergence(fixed.correction_start))
        logger.info(f"[seed {seed}] {len(failures)} raw failures, {len(corrected)} corrected")

        datasets = build_datasets(demos + corrected + failures, sizes)
        save_dataset(datasets.success, self.dataset_path(seed, "success"))
        save_dataset(datasets.failure, self.dataset_path(seed, "failure"))
        return datasets

    def train_correction_stage(self, seed: int, model: DagModel, datasets: Datasets) -> DagModel:
        self._enter(seed, "success_correction")
        tuned = model.copy()
        train_success_only(
            self._chunks(datasets.success, tuned),
            tuned,
            self.process,
            self.config.optimizer,
            steps=self.config.optimizer.finetune_steps,
            seed=seed + 1,
            checkpoint_path=self.checkpoint_path(seed, "success_correction"),
        )
        return tuned

    # Stage 5 and 6

    def train_dag_stage(self, seed: int, model: DagModel, datasets: Datasets) -> DagModel:
        self._enter(seed, "dag")
        dag = model.copy()
        dag.reset_head("fail", seed=seed + 2)
        train_dag(
            self._chunks(datasets.success, dag),
            self._chunks(datasets.failure, dag, self.config.data.failure_chunks),
            dag,
            self.process,
            self.config.optimizer,
            seed=seed + 2,
            checkpoint_path=self.checkpoint_path(seed, "dag"),
        )
        return dag

    def evaluate_stage(self, seed: int, models: Dict[str, DagModel]) -> List[EpisodeResult]:
        self._enter(seed, "evaluation")
        ev = self.config.evaluation
        n_configs = ev.ood_configs if self.config.env.ood else ev.n_configs
        policies = {
            arm.name: ModelPolicy(models[arm.checkpoint], arm.guidance, self.process, clip=ev.clip)
            for arm in self.config.arms
        }
        traces: Dict[str, Dict[str, list]] = {}
        results = asyncio.run(
            evaluate_arms(policies, self.eval_tasks, n_configs, ev.n_runs, seed, ev.config_offset, self.workers, traces)
        )
        for arm, arm_traces in traces.items():
            write_traces(arm_traces, arm, self.seed_dir(seed))
        return [row for rows in results.values() for row in rows]

    def run_seed(self, seed: int) -> List[EpisodeResult]:
        demos, noisy = self.collect_demonstrations(seed)
        m1 = self.train_success_stage(seed, demos, noisy)
        datasets = self.collect_failures(seed, m1, demos, noisy)
        m2 = self.train_correction_stage(seed, m1, datasets)
        m3 = self.train_dag_stage(seed, m2, datasets)
        return self.evaluate_stage(seed, {"success_only": m1, "success_correction": m2, "dag": m3})

    def run(self) -> PipelineReport:
        """Every stage for every seed, then the result files."""
        config = self.config
        report = PipelineReport(
            config_name=config.name, config_hash=config.config_hash(), output_dir=str(self.out_dir)
        )
        self.out_dir.mkdir(parents=True, exist_ok=True)
        for seed in config.seeds:
            try:
                report.episodes.extend(self.run_seed(seed))
            except DagfilError as e:
                error = PipelineError(str(e), stage=f"seed {seed}: {self.stage}")
                logger.error(f"Pipeline stopped: {error}")
                report.stage_reached = error.stage
                report.error = str(error)
                break
        else:
            report.stage_reached = "done"

        report.summary = success_rates(report.episodes)
        report.aggregate = aggregate_seeds(report.summary)
        if report.episodes:
            write_results(report.episodes, self.out_dir)
        (self.out_dir / "report.json").write_text(report.model_dump_json(indent=2), encoding="utf-8")
        return report

    def run_stage(self, stage: str) -> None:
        """
        Run one training stage for every seed, reading earlier artifacts from disk.

        Raises:
            ContractError: unknown stage
            ParseError: a prerequisite artifact is missing
        """
        for seed in self.config.seeds:
            if stage == "success":
                demos, noisy = self.collect_demonstrations(seed)
                self.train_success_stage(seed, demos, noisy)
            elif stage == "correction":
                model = load_checkpoint(self.checkpoint_path(seed, "success_only"))
                demos = load_dataset(self.dataset_path(seed, "demonstrations"))
                noisy = load_dataset(self.dataset_path(seed, "bootstrap"))
                datasets = self.collect_failures(seed, model, demos, noisy)
                self.train_correction_stage(seed, model, datasets)
            elif stage == "dag":
                model = load_checkpoint(self.checkpoint_path(seed, "success_correction"))
                success = load_dataset(self.dataset_path(seed, "success"))
                failure = load_dataset(self.dataset_path(seed, "failure"))
                datasets = Datasets(success, failure, compute_stats(success + failure))
                self.train_dag_stage(seed, model, datasets)
            else:
                raise ContractError(f"unknown stage {stage!r}")


def full_pipeline(config: RunConfig, settings: Optional[Settings] = None) -> PipelineReport:
    """Run the whole experiment for ``config``; see :class:`Pipeline`."""
    return Pipeline(config, settings).run()
