"""Tests for result files and reports."""

import csv

import pytest

from dagfil.core.errors import ParseError
from dagfil.guidance.score_fn import GuidanceRecord
from dagfil.harness.evaluation import success_rates
from dagfil.harness.reporting import (
    aggregate_seeds,
    build_report,
    read_episodes_csv,
    read_summary_csv,
    write_results,
    write_traces,
)
from dagfil.harness.schemas import EpisodeResult


def _rows(seed: int, successes: int, total: int = 4, arm: str = "adaptive_fil"):
    return [
        EpisodeResult(
            task="pick_place",
            arm=arm,
            config_id=i,
            run=0,
            seed=seed,
            outcome="success" if i < successes else "failure",
            steps=10 + i,
            mean_lambda=0.25 * i,
        )
        for i in range(total)
    ]


class TestResultFiles:
    """Test cases for CSV result files."""

    def test_round_trip(self, tmp_path):
        """Episode rows read back equal."""
        rows = _rows(0, 3) + _rows(1, 1)
        written = write_results(rows, tmp_path)
        assert read_episodes_csv(written["episodes"]) == rows
        summary = read_summary_csv(written["summary"])
        assert [s.success_rate_pct for s in summary] == [75.0, 25.0]

    def test_malformed_row(self, tmp_path):
        """A bad row is reported with its line."""
        path = write_results(_rows(0, 2), tmp_path)["episodes"]
        lines = path.read_text().splitlines()
        lines[3] = lines[3].replace("success", "maybe").replace("failure", "maybe")
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError) as exc:
            read_episodes_csv(path)
        assert exc.value.line == 4

    def test_aggregate(self):
        """Seeds are averaged with the population standard deviation."""
        summary = success_rates(_rows(0, 4) + _rows(1, 2) + _rows(2, 0))
        (row,) = aggregate_seeds(summary)
        assert row.mean_success_rate_pct == pytest.approx(50.0)
        assert row.std_success_rate_pct == pytest.approx((5000.0 / 3.0) ** 0.5)
        assert row.n_seeds == 3


class TestTraces:
    """Test cases for λ̂ trace files."""

    def test_write_traces(self, tmp_path):
        """One file per episode with exact float text."""
        records = [GuidanceRecord(0, 49.0, 0.5, 0.5), GuidanceRecord(0, 48.0, 0.1, 0.9)]
        (path,) = write_traces({"reach:3:0:1:failure": records}, "adaptive_fil", tmp_path)
        assert path == tmp_path / "traces" / "adaptive_fil" / "reach_3_1.csv"
        with path.open() as f:
            table = list(csv.reader(f))
        assert table[0] == ["query", "step", "cos", "lambda"]
        assert float(table[2][3]) == 0.9


class TestBuildReport:
    """Test cases for build_report."""

    def test_recounts_runs(self, tmp_path):
        """Episode files from several runs are recounted into one summary."""
        write_results(_rows(0, 4), tmp_path / "runs" / "a")
        write_results(_rows(1, 0), tmp_path / "runs" / "b")
        trace = {"pick_place:0:1:0:failure": [GuidanceRecord(0, 1.0, 0.0, 1.0)]}
        write_traces(trace, "adaptive_fil", tmp_path / "runs" / "b")
        written = build_report(tmp_path / "runs", tmp_path / "report")
        assert len(read_episodes_csv(written["episodes"])) == 8
        with written["aggregate"].open() as f:
            (agg,) = list(csv.DictReader(f))
        assert float(agg["mean_success_rate_pct"]) == 50.0
        with written["traces"].open() as f:
            traces = list(csv.reader(f))
        assert traces[1][:3] == ["b", "adaptive_fil", "pick_place_0_0"]

    def test_no_inputs(self, tmp_path):
        """An empty input tree is an error."""
        with pytest.raises(ParseError):
            build_report(tmp_path, tmp_path / "out")
