"""Evaluation protocol, rollout policies and result files."""

from .schemas import AggregateRow, EpisodeResult, PipelineReport, SummaryRow
from .policies import ModelPolicy, default_process
from .evaluation import evaluate, evaluate_arms, success_rates, summary_line, to_results
from .reporting import (
    aggregate_seeds,
    build_report,
    collect_traces,
    read_episodes_csv,
    read_summary_csv,
    write_aggregate_csv,
    write_episodes_csv,
    write_results,
    write_summary_csv,
    write_traces,
)

__all__ = [
    "AggregateRow",
    "EpisodeResult",
    "PipelineReport",
    "SummaryRow",
    "ModelPolicy",
    "default_process",
    "evaluate",
    "evaluate_arms",
    "success_rates",
    "summary_line",
    "to_results",
    "aggregate_seeds",
    "build_report",
    "collect_traces",
    "read_episodes_csv",
    "read_summary_csv",
    "write_aggregate_csv",
    "write_episodes_csv",
    "write_results",
    "write_summary_csv",
    "write_traces",
]
