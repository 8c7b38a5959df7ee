"""
Checkpoint: Save and load a DagModel as a numpy archive.

The archive holds every parameter array under its parameter name, the
normalization statistics under ``stats/<field>``, and a JSON header with the
model settings, generative process settings and trained-head set. Loading
restores the parameters bit-exactly.
"""

from typing import Any, Dict, Optional, Union
from pathlib import Path
import json
import logging
import os
import tempfile

import numpy as np

from ..core.config import ModelSettings
from ..core.errors import ParseError
from ..data.stats import DatasetStats
from .dag import DagModel

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "dagfil-checkpoint"
CHECKPOINT_VERSION = 1
HEADER_KEY = "__header__"
STATS_PREFIX = "stats/"


def save_checkpoint(
    model: DagModel,
    path: Union[str, Path],
    process: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Write a checkpoint atomically.

    Args:
        model: Model to save
        path: Destination ``.npz`` path
        process: Generative process settings recorded in the header

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "model": model.settings.model_dump(mode="json"),
        "obs_dim": model.obs_dim,
        "seed": model.seed,
        "mode": model.mode,
        "process": process or {},
        "trained_heads": sorted(model.trained_heads),
        "stats_counts": model.stats.counts if model.stats is not None else None,
    }
    arrays: Dict[str, np.ndarray] = {p.name: p.data for p in model.parameters()}
    if model.stats is not None:
        for key, value in model.stats.to_arrays().items():
            arrays[STATS_PREFIX + key] = value
    arrays[HEADER_KEY] = np.array(json.dumps(header, sort_keys=True))

    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".npz.tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            np.savez(f, **arrays)
        os.replace(tmp, path)
    except Exception:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

    logger.info(f"Wrote checkpoint {path} (heads trained: {sorted(model.trained_heads)})")
    return path


def read_header(path: Union[str, Path]) -> Dict[str, Any]:
    """Read only the JSON header of a checkpoint."""
    with np.load(Path(path), allow_pickle=False) as archive:
        return _parse_header(archive, path)


def _parse_header(archive: Any, path: Union[str, Path]) -> Dict[str, Any]:
    if HEADER_KEY not in archive.files:
        raise ParseError(f"{path} is not a dagfil checkpoint (missing header)")
    header = json.loads(str(archive[HEADER_KEY]))
    if header.get("format") != CHECKPOINT_FORMAT:
        raise ParseError(f"{path} has unknown format {header.get('format')!r}")
    return header


def load_checkpoint(path: Union[str, Path]) -> DagModel:
    """
    Rebuild a DagModel from a checkpoint.

    Raises:
        ParseError: missing file, foreign archive, or parameter mismatch
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"Checkpoint not found: {path}")

    with np.load(path, allow_pickle=False) as archive:
        header = _parse_header(archive, path)
        settings = ModelSettings.model_validate(header["model"])
        model = DagModel(settings, obs_dim=int(header["obs_dim"]), seed=int(header.get("seed", 0)))
        for p in model.parameters():
            if p.name not in archive.files:
                raise ParseError(f"{path} is missing parameter {p.name}")
            p.assign(archive[p.name])

        stats_keys = [k for k in archive.files if k.startswith(STATS_PREFIX)]
        if stats_keys:
            arrays = {k[len(STATS_PREFIX):]: archive[k] for k in stats_keys}
            model.stats = DatasetStats.from_arrays_dict(arrays, header.get("stats_counts") or {})

    model.trained_heads = set(header.get("trained_heads", []))
    model.process = header.get("process", {})
    logger.debug(f"Loaded checkpoint {path}")
    return model
