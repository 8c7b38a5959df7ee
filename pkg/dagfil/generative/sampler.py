"""
Sampler: Ancestral DDPM and Euler flow integration driven by a callback.

The callback ``score_fn(a, step)`` returns an ε prediction (diffusion, with
an integer step) or a velocity (flow, with a time in [0, 1]). Guidance is
composed inside the callback, so the sampler is the same for every arm.
"""

from typing import TYPE_CHECKING, Callable, Optional, Union
import logging

import numpy as np

from ..core.errors import NumericError, ShapeError
from ..numerics import Tensor
from .schedule import FlowConfig, NoiseSchedule, Process

if TYPE_CHECKING:
    from ..data.stats import DatasetStats

logger = logging.getLogger(__name__)

ScoreFn = Callable[[Tensor, Union[int, float]], Tensor]


def _query(score_fn: ScoreFn, x: np.ndarray, step: Union[int, float]) -> np.ndarray:
    out = score_fn(Tensor(x), step)
    values = out.data if isinstance(out, Tensor) else np.asarray(out, dtype=np.float64)
    if values.shape != x.shape:
        raise ShapeError("score callback changed the chunk shape", [x.shape, values.shape])
    if not np.all(np.isfinite(values)):
        raise NumericError(f"non-finite score at step {step}", op="sample")
    return values


def _clip(x: np.ndarray, clip: Optional[float], step: Union[int, float]) -> np.ndarray:
    if clip is None:
        return x
    hits = int(np.count_nonzero(np.abs(x) > clip))
    if hits:
        logger.debug(f"Clipped {hits} chunk entries at step {step}")
        return np.clip(x, -clip, clip)
    return x


def sample(
    score_fn: ScoreFn,
    process: Process,
    rng: np.random.Generator,
    size: int,
    stats: Optional["DatasetStats"] = None,
    clip: Optional[float] = 3.0,
) -> Tensor:
    """
    Draw one flattened action chunk.

    Args:
        score_fn: ε or velocity callback
        process: NoiseSchedule (ancestral diffusion) or FlowConfig (Euler flow)
        rng: Generator owned by this call
        size: Flattened chunk width d×H
        stats: When given, the result is de-normalized per action dimension
        clip: Bound on intermediate values in normalized units; None disables

    Raises:
        NumericError: the callback produced NaN/Inf
    """
    x = rng.standard_normal(size)

    if isinstance(process, NoiseSchedule):
        for step in reversed(range(process.n_steps)):
            eps = _query(score_fn, x, step)
            coef = process.betas[step] / np.sqrt(1.0 - process.alpha_bars[step])
            x = (x - coef * eps) / np.sqrt(process.alphas[step])
            if step > 0:
                x = x + np.sqrt(process.posterior_variance(step)) * rng.standard_normal(size)
            x = _clip(x, clip, step)
    elif isinstance(process, FlowConfig):
        grid = process.t_grid
        for i in range(process.n_euler_steps):
            t = float(grid[i])
            v = _query(score_fn, x, t)
            x = _clip(x + (grid[i + 1] - grid[i]) * v, clip, t)
    else:
        raise TypeError(f"unsupported generative process {type(process).__name__}")

    if stats is not None:
        x = stats.denormalize_actions(x.reshape(-1, stats.action_dim)).reshape(-1)
    return Tensor(x)
