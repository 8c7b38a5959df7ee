"""
Persistence: Line-delimited JSON dataset files.

Line 1 is a header ``{"format", "version", "count"}``; each following line
holds one trajectory with its steps flattened. Floats are written with
their shortest round-tripping representation, so a load reproduces the
saved arrays bit for bit.
"""

from typing import Any, Dict, List, Sequence, Union
from pathlib import Path
import json
import logging
import os
import tempfile

import numpy as np

from ..core.errors import DagfilError, ParseError
from .trajectory import Outcome, Trajectory

logger = logging.getLogger(__name__)

DATASET_FORMAT = "dagfil-dataset"
DATASET_VERSION = 1

_REQUIRED = ("task_id", "config_id", "seed", "run", "outcome", "obs_dim", "action_dim", "observations", "actions")


def _record(traj: Trajectory) -> Dict[str, Any]:
    return {
        "task_id": traj.task_id,
        "config_id": traj.config_id,
        "seed": traj.seed,
        "run": traj.run,
        "outcome": traj.outcome.value,
        "correction_start": traj.correction_start,
        "divergence_index": traj.divergence_index,
        "numeric_fault": traj.numeric_fault,
        "lambda_log": list(traj.lambda_log) if traj.lambda_log is not None else None,
        "obs_dim": int(traj.observations.shape[1]),
        "action_dim": int(traj.actions.shape[1]),
        "observations": traj.observations.reshape(-1).tolist(),
        "actions": traj.actions.reshape(-1).tolist(),
    }


def save_dataset(trajectories: Sequence[Trajectory], path: Union[str, Path]) -> Path:
    """Write trajectories atomically, one per line after the header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {"format": DATASET_FORMAT, "version": DATASET_VERSION, "count": len(trajectories)}

    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".jsonl.tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(json.dumps(header) + "\n")
            for traj in trajectories:
                f.write(json.dumps(_record(traj)) + "\n")
        os.replace(tmp, path)
    except Exception:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

    logger.info(f"Saved {len(trajectories)} trajectories to {path}")
    return path


def _parse_record(data: Any, line: int) -> Trajectory:
    if not isinstance(data, dict):
        raise ParseError("record is not an object", line=line)
    missing = [k for k in _REQUIRED if k not in data]
    if missing:
        raise ParseError(f"missing fields {missing}", line=line)
    try:
        obs = np.asarray(data["observations"], dtype=np.float64).reshape(-1, int(data["obs_dim"]))
        act = np.asarray(data["actions"], dtype=np.float64).reshape(-1, int(data["action_dim"]))
        return Trajectory(
            task_id=str(data["task_id"]),
            config_id=int(data["config_id"]),
            seed=int(data["seed"]),
            run=int(data["run"]),
            observations=obs,
            actions=act,
            outcome=Outcome(data["outcome"]),
            correction_start=data.get("correction_start"),
            divergence_index=data.get("divergence_index"),
            lambda_log=data.get("lambda_log"),
            numeric_fault=bool(data.get("numeric_fault", False)),
        )
    except (TypeError, ValueError, DagfilError) as e:
        raise ParseError(str(e), line=line)


def load_dataset(path: Union[str, Path]) -> List[Trajectory]:
    """
    Read a dataset file; nothing is returned unless the whole file parses.

    Raises:
        ParseError: missing file, bad header, malformed line, or a record
            count that disagrees with the header
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"Dataset not found: {path}")

    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("missing header", line=1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid header: {e.msg}", line=1)
    if not isinstance(header, dict) or header.get("format") != DATASET_FORMAT:
        raise ParseError(f"not a {DATASET_FORMAT} file", line=1)

    trajectories = []
    for number, text in enumerate(lines[1:], start=2):
        if not text.strip():
            continue
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", line=number)
        trajectories.append(_parse_record(data, number))

    expected = header.get("count")
    if expected != len(trajectories):
        raise ParseError(f"header declares {expected} records, found {len(trajectories)}", line=len(lines))
    logger.debug(f"Loaded {len(trajectories)} trajectories from {path}")
    return trajectories
