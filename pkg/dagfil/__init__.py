"""
dagfil - Failure-informed guidance for dual action generators

Diffusion and flow-matching action policies with success and failure
generator heads on a shared trunk, guided sampling that steers away from
learned failure modes, and deterministic toy manipulation tasks to evaluate
them on.
"""

__version__ = "0.1.0"

from .core.errors import DagfilError
from .core.config import RunConfig, load_run_config

__all__ = [
    "DagfilError",
    "RunConfig",
    "load_run_config",
]
