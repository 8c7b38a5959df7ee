"""Training loops and the staged pipeline."""

from .trainer import TrainingHistory, train_dag, train_success_only
from .pipeline import CHECKPOINTS, TRAIN_STAGES, Pipeline, full_pipeline, make_process

__all__ = [
    "TrainingHistory",
    "train_dag",
    "train_success_only",
    "CHECKPOINTS",
    "TRAIN_STAGES",
    "Pipeline",
    "full_pipeline",
    "make_process",
]
