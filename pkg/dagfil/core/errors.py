"""
Errors: Exception hierarchy shared by every dagfil subpackage.

Each exception carries the structured context callers need to report the
failure without parsing the message.
"""

from typing import Any, Optional, Sequence, Tuple


class DagfilError(Exception):
    """Base class for all dagfil errors."""


class ShapeError(DagfilError):
    """Raised when operand shapes do not conform."""

    def __init__(self, message: str, shapes: Optional[Sequence[Tuple[int, ...]]] = None):
        self.shapes = [tuple(s) for s in shapes] if shapes else []
        if self.shapes:
            message = f"{message} (shapes: {', '.join(str(s) for s in self.shapes)})"
        super().__init__(message)


class NumericError(DagfilError):
    """Raised when a computation produces NaN or Inf."""

    def __init__(self, message: str, op: Optional[str] = None):
        self.op = op
        super().__init__(f"{op}: {message}" if op else message)


class ContractError(DagfilError):
    """Raised when an operation's precondition is violated."""


class ConfigError(DagfilError):
    """Raised for invalid configuration or incompatible settings."""

    def __init__(self, message: str, errors: Optional[Sequence[str]] = None):
        self.errors = list(errors or [])
        super().__init__(message)


class PlanError(DagfilError):
    """Raised when the motion planner finds no collision-free path."""


class NoCorrection(DagfilError):
    """Raised when a failed trajectory has no recoverable prefix."""

    def __init__(self, message: str, uid: Optional[str] = None):
        self.uid = uid
        super().__init__(message)


class DataError(DagfilError):
    """Raised when dataset assembly cannot produce a usable split."""

    def __init__(self, message: str, split: Optional[str] = None):
        self.split = split
        super().__init__(message)


class ParseError(DagfilError):
    """Raised when a persisted file cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"Parse error at line {line}: {message}" if line else message)


class TrainingDivergedError(DagfilError):
    """Raised when training produces a non-finite loss."""

    def __init__(self, message: str, checkpoint_path: Optional[Any] = None, step: int = 0):
        self.checkpoint_path = checkpoint_path
        self.step = step
        super().__init__(message)


class PipelineError(DagfilError):
    """Raised when a pipeline stage fails."""

    def __init__(self, message: str, stage: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")
