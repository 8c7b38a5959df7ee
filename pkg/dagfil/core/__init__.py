"""Core plumbing: errors, configuration and logging setup."""

from .errors import (
    DagfilError,
    ShapeError,
    NumericError,
    ContractError,
    ConfigError,
    PlanError,
    NoCorrection,
    DataError,
    ParseError,
    TrainingDivergedError,
    PipelineError,
)
from .logging import configure_logging

__all__ = [
    "DagfilError",
    "ShapeError",
    "NumericError",
    "ContractError",
    "ConfigError",
    "PlanError",
    "NoCorrection",
    "DataError",
    "ParseError",
    "TrainingDivergedError",
    "PipelineError",
    "configure_logging",
]
