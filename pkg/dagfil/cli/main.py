"""
dagfil command line.

Subcommands:
    train    run the pipeline, or one training stage, from a run config
    collect  roll out a policy and write a dataset file
    eval     score one checkpoint under one guidance spec
    ablate   sweep the static or adaptive guidance scale
    report   recount episode CSVs into summary tables and trace data

Usage errors exit with status 2, configuration errors with status 1; in
both cases nothing is written.
"""

from typing import List, Optional, Sequence
from pathlib import Path
import argparse
import asyncio
import logging
import sys

from pydantic import ValidationError

from ..core.config import RunConfig, Settings, get_settings, load_run_config
from ..core.errors import ConfigError, DagfilError
from ..core.logging import configure_logging
from ..data.collection import collect_rollouts
from ..data.persistence import save_dataset
from ..envs.arena import TaskSpec, make_task_spec
from ..envs.expert import ExpertPolicy, NoisyExpertPolicy
from ..guidance.spec import GuidanceKind, GuidanceSpec
from ..harness.evaluation import evaluate_arms, summary_line
from ..harness.policies import ModelPolicy
from ..harness.reporting import build_report, write_results, write_traces
from ..models.checkpoint import load_checkpoint
from ..training.pipeline import TRAIN_STAGES, Pipeline

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dagfil", description="Failure-informed guidance lab")
    parser.add_argument("--log-level", default=None, help="Override DAGFIL_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="Run the pipeline or one training stage")
    train.add_argument("--config", required=True, type=Path, help="Run config YAML")
    train.add_argument("--stage", choices=("all",) + TRAIN_STAGES, default="all")

    collect = sub.add_parser("collect", help="Roll out a policy and save a dataset")
    collect.add_argument("--config", required=True, type=Path)
    collect.add_argument("--policy", choices=("expert", "noisy", "checkpoint"), default="expert")
    collect.add_argument("--checkpoint", type=Path, help="Model for --policy checkpoint")
    collect.add_argument("--out", required=True, type=Path, help="Dataset file (.jsonl)")
    collect.add_argument("--configs", type=int, default=None, help="Configs per task")
    collect.add_argument("--runs", type=int, default=1)
    collect.add_argument("--seed", type=int, default=0)

    ev = sub.add_parser("eval", help="Evaluate one checkpoint under one guidance spec")
    ev.add_argument("--checkpoint", required=True, type=Path)
    ev.add_argument("--config", type=Path, help="Run config for env and evaluation settings")
    _add_guidance_args(ev)
    ev.add_argument("--tasks", nargs="+", default=None)
    ev.add_argument("--configs", type=int, default=None)
    ev.add_argument("--runs", type=int, default=None)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--ood", action="store_true", help="Use the shifted clutter layouts")
    ev.add_argument("--arm", default=None, help="Arm label (default: guidance label)")
    ev.add_argument("--out", type=Path, default=None)

    ablate = sub.add_parser("ablate", help="Sweep lam (static) or alpha (adaptive)")
    ablate.add_argument("--config", required=True, type=Path)
    ablate.add_argument("--checkpoint", required=True, type=Path)
    ablate.add_argument("--param", choices=("alpha", "lam"), default="alpha")
    ablate.add_argument("--values", nargs="+", type=float, default=None)
    ablate.add_argument("--tasks", nargs="+", default=None)
    ablate.add_argument("--seed", type=int, default=0)
    ablate.add_argument("--out", type=Path, default=None)

    report = sub.add_parser("report", help="Aggregate episode CSVs and traces")
    report.add_argument("--inputs", required=True, type=Path)
    report.add_argument("--out", type=Path, default=None)
    return parser


def _add_guidance_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kind", choices=[k.value for k in GuidanceKind], default=GuidanceKind.NONE.value)
    parser.add_argument("--lam", type=float, default=0.0)
    parser.add_argument("--alpha", type=float, default=0.0)
    parser.add_argument("--cos-floor", type=float, default=1e-8)


def _guidance(args: argparse.Namespace) -> GuidanceSpec:
    try:
        return GuidanceSpec(kind=args.kind, lam=args.lam, alpha=args.alpha, cos_floor=args.cos_floor)
    except ValidationError as e:
        raise ConfigError("Invalid guidance flags", errors=[err["msg"] for err in e.errors()])


def _config(path: Optional[Path]) -> RunConfig:
    return load_run_config(path) if path is not None else RunConfig()


def _tasks(config: RunConfig, names: Optional[Sequence[str]]) -> List[TaskSpec]:
    selected = list(names) if names else list(config.env.tasks)
    unknown = [n for n in selected if n not in config.env.tasks]
    if unknown:
        raise ConfigError(f"tasks {unknown} are not in the configured task list {config.env.tasks}")
    return [make_task_spec(name, config.env) for name in selected]


def _print_summary(rows) -> None:
    for line in summary_line(rows).split(", "):
        print(f"  {line}")


def cmd_train(args: argparse.Namespace, settings: Settings) -> int:
    config = load_run_config(args.config)
    pipeline = Pipeline(config, settings)
    if args.stage != "all":
        pipeline.run_stage(args.stage)
        print(f"Stage {args.stage} finished; artifacts in {pipeline.out_dir}")
        return 0
    report = pipeline.run()
    for row in report.aggregate:
        print(f"{row.task:<22} {row.arm:<20} {row.mean_success_rate_pct:6.1f} ± {row.std_success_rate_pct:.1f}")
    if report.error:
        print(f"Pipeline stopped: {report.error}", file=sys.stderr)
        return 1
    return 0


def cmd_collect(args: argparse.Namespace, settings: Settings) -> int:
    config = load_run_config(args.config)
    horizon = config.model.horizon
    if args.policy == "checkpoint":
        if args.checkpoint is None:
            raise ConfigError("--policy checkpoint needs --checkpoint")
        policy = ModelPolicy(load_checkpoint(args.checkpoint), clip=config.evaluation.clip)
    elif args.policy == "noisy":
        policy = NoisyExpertPolicy(config.data.bootstrap_noise, horizon)
    else:
        policy = ExpertPolicy(horizon)

    n_configs = args.configs or config.data.demo_configs
    trajectories = []
    for spec in _tasks(config, None):
        trajectories.extend(
            collect_rollouts(
                policy, spec, n_configs, args.runs, args.seed, config.train_config_offset, settings.workers
            )
        )
    save_dataset(trajectories, args.out)
    print(f"Wrote {len(trajectories)} trajectories to {args.out}")
    return 0


def _run_arms(policies, tasks, n_configs, n_runs, seed, offset, workers, out_dir: Path) -> list:
    traces = {}
    results = asyncio.run(evaluate_arms(policies, tasks, n_configs, n_runs, seed, offset, workers, traces))
    rows = [row for arm_rows in results.values() for row in arm_rows]
    write_results(rows, out_dir)
    for arm, arm_traces in traces.items():
        write_traces(arm_traces, arm, out_dir)
    return rows


def cmd_eval(args: argparse.Namespace, settings: Settings) -> int:
    config = _config(args.config)
    if args.ood:
        config = config.model_copy(update={"env": config.env.model_copy(update={"ood": True})})
    guidance = _guidance(args)
    tasks = _tasks(config, args.tasks)
    ev = config.evaluation
    policy = ModelPolicy(load_checkpoint(args.checkpoint), guidance, clip=ev.clip)
    n_configs = args.configs or (ev.ood_configs if args.ood else ev.n_configs)
    n_runs = args.runs or ev.n_runs
    out_dir = args.out or settings.output_root / "eval"

    arm = args.arm or guidance.label()
    rows = _run_arms({arm: policy}, tasks, n_configs, n_runs, args.seed, ev.config_offset, settings.workers, out_dir)
    print(f"{arm}: {len(rows)} episodes -> {out_dir}")
    _print_summary(rows)
    return 0


def cmd_ablate(args: argparse.Namespace, settings: Settings) -> int:
    config = load_run_config(args.config)
    tasks = _tasks(config, args.tasks)
    values = args.values or config.alpha_sweep
    model = load_checkpoint(args.checkpoint)
    ev = config.evaluation

    policies = {}
    for value in values:
        try:
            if args.param == "alpha":
                spec = GuidanceSpec(kind=GuidanceKind.ADAPTIVE_FI, alpha=value)
            else:
                spec = GuidanceSpec(kind=GuidanceKind.STATIC_FI, lam=value)
        except ValidationError as e:
            raise ConfigError(f"Invalid --values entry {value}", errors=[err["msg"] for err in e.errors()])
        policies[spec.label()] = ModelPolicy(model, spec, clip=ev.clip)

    out_dir = args.out or config.resolve_output_dir(settings) / f"ablate_{args.param}"
    rows = _run_arms(policies, tasks, ev.n_configs, ev.n_runs, args.seed, ev.config_offset, settings.workers, out_dir)
    print(f"Ablation over {args.param} = {values} -> {out_dir}")
    _print_summary(rows)
    return 0


def cmd_report(args: argparse.Namespace, settings: Settings) -> int:
    out_dir = args.out or args.inputs / "report"
    written = build_report(args.inputs, out_dir)
    for name, path in written.items():
        print(f"{name}: {path}")
    return 0


COMMANDS = {
    "train": cmd_train,
    "collect": cmd_collect,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit status."""
    args = build_parser().parse_args(argv)
    settings = get_settings()
    configure_logging(args.log_level or settings.log_level)
    try:
        return COMMANDS[args.command](args, settings)
    except ConfigError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        for detail in e.errors:
            print(f"  {detail}", file=sys.stderr)
        return 1
    except DagfilError as e:
        logger.error(f"{args.command} failed: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
