"""Dual action generator network and checkpoints."""

from .dag import (
    HEADS,
    HeadFn,
    Conditioning,
    DagModel,
    Linear,
    encode,
    predict_succ,
    predict_fail,
    sinusoidal_embedding,
    task_one_hot,
)
from .checkpoint import load_checkpoint, read_header, save_checkpoint

__all__ = [
    "HEADS",
    "HeadFn",
    "Conditioning",
    "DagModel",
    "Linear",
    "encode",
    "predict_succ",
    "predict_fail",
    "sinusoidal_embedding",
    "task_one_hot",
    "load_checkpoint",
    "read_header",
    "save_checkpoint",
]
