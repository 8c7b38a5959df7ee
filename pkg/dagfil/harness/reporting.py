"""
Reporting: CSV result files, λ̂ trace files and cross-seed aggregation.

Files written here:
    episodes.csv   one row per evaluated episode
    summary.csv    success rate per (task, arm, seed)
    aggregate.csv  mean and standard deviation of success rate across seeds
    traces/<arm>/<task>_<config>_<run>.csv  per sampler step guidance records
"""

from collections import OrderedDict
from typing import Dict, Iterable, List, Sequence, Type, TypeVar, Union
from pathlib import Path
import csv
import logging
import math

from pydantic import BaseModel, ValidationError

from ..core.errors import ParseError
from .evaluation import success_rates
from .schemas import AggregateRow, EpisodeResult, SummaryRow

logger = logging.getLogger(__name__)

Row = TypeVar("Row", bound=BaseModel)

TRACE_FIELDS = ["query", "step", "cos", "lambda"]


def _write_rows(rows: Sequence[BaseModel], model: Type[BaseModel], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=list(model.model_fields))
        writer.writeheader()
        for row in rows:
            writer.writerow(row.model_dump())
    logger.debug(f"Wrote {len(rows)} rows to {path}")
    return path


def _read_rows(path: Union[str, Path], model: Type[Row]) -> List[Row]:
    path = Path(path)
    if not path.exists():
        raise ParseError(f"Results file not found: {path}")
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        rows = []
        for line, record in enumerate(reader, start=2):
            try:
                rows.append(model.model_validate(record))
            except ValidationError as e:
                raise ParseError(f"{path}: {e.errors()[0]['msg']}", line=line)
    return rows


def write_episodes_csv(rows: Sequence[EpisodeResult], path: Union[str, Path]) -> Path:
    return _write_rows(rows, EpisodeResult, path)


def read_episodes_csv(path: Union[str, Path]) -> List[EpisodeResult]:
    return _read_rows(path, EpisodeResult)


def write_summary_csv(rows: Sequence[SummaryRow], path: Union[str, Path]) -> Path:
    return _write_rows(rows, SummaryRow, path)


def read_summary_csv(path: Union[str, Path]) -> List[SummaryRow]:
    return _read_rows(path, SummaryRow)


def write_aggregate_csv(rows: Sequence[AggregateRow], path: Union[str, Path]) -> Path:
    return _write_rows(rows, AggregateRow, path)


def aggregate_seeds(rows: Iterable[SummaryRow]) -> List[AggregateRow]:
    """Mean and population standard deviation of success rate over seeds."""
    groups: "OrderedDict[tuple, List[float]]" = OrderedDict()
    for row in rows:
        groups.setdefault((row.task, row.arm), []).append(row.success_rate_pct)
    out = []
    for (task, arm), rates in groups.items():
        mean = math.fsum(rates) / len(rates)
        std = math.sqrt(math.fsum((r - mean) ** 2 for r in rates) / len(rates))
        out.append(
            AggregateRow(
                task=task, arm=arm, mean_success_rate_pct=mean, std_success_rate_pct=std, n_seeds=len(rates)
            )
        )
    return out


def write_traces(traces: Dict[str, list], arm: str, out_dir: Union[str, Path]) -> List[Path]:
    """
    One CSV per guided episode under ``<out_dir>/traces/<arm>/``.

    Args:
        traces: uid (``task:config:seed:run:outcome``) to guidance records
        arm: Arm label used as the directory name
        out_dir: Run output directory
    """
    written = []
    for uid, records in traces.items():
        task, config_id, _, run, _ = uid.split(":")
        path = Path(out_dir) / "traces" / arm / f"{task}_{config_id}_{run}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(TRACE_FIELDS)
            for rec in records:
                writer.writerow([rec.query, repr(rec.step), repr(rec.cos), repr(rec.lam)])
        written.append(path)
    return written


def collect_traces(inputs: Union[str, Path], out_path: Union[str, Path]) -> Path:
    """Concatenate every trace file under ``inputs`` into one long-format CSV."""
    inputs, out_path = Path(inputs), Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", newline="", encoding="utf-8") as out:
        writer = csv.writer(out)
        writer.writerow(["source", "arm", "episode"] + TRACE_FIELDS)
        for path in sorted(inputs.rglob("traces/*/*.csv")):
            with path.open(newline="", encoding="utf-8") as f:
                reader = csv.reader(f)
                next(reader, None)
                for record in reader:
                    source = str(path.parent.parent.parent.relative_to(inputs))
                    writer.writerow([source, path.parent.name, path.stem] + record)
    return out_path


def write_results(rows: Sequence[EpisodeResult], out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Write episodes, per-seed summary and cross-seed aggregate CSVs."""
    out_dir = Path(out_dir)
    summary = success_rates(rows)
    return {
        "episodes": write_episodes_csv(rows, out_dir / "episodes.csv"),
        "summary": write_summary_csv(summary, out_dir / "summary.csv"),
        "aggregate": write_aggregate_csv(aggregate_seeds(summary), out_dir / "aggregate.csv"),
    }


def build_report(inputs: Union[str, Path], out_dir: Union[str, Path]) -> Dict[str, Path]:
    """
    Recount every ``episodes.csv`` found under ``inputs`` into summary tables
    and gather the λ̂ traces for plotting.

    Raises:
        ParseError: no episode files found, or a malformed row
    """
    inputs = Path(inputs)
    target = Path(out_dir).resolve()
    files = sorted(p for p in inputs.rglob("episodes.csv") if p.parent.resolve() != target)
    if not files:
        raise ParseError(f"no episodes.csv under {inputs}")
    rows: List[EpisodeResult] = []
    for path in files:
        rows.extend(read_episodes_csv(path))
    written = write_results(rows, out_dir)
    written["traces"] = collect_traces(inputs, Path(out_dir) / "lambda_traces.csv")
    logger.info(f"Report over {len(files)} episode files written to {out_dir}")
    return written
