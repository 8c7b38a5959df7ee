"""
Losses: Noise-prediction and flow-matching objectives over chunk batches.

Both losses take a head callable ``head(noisy, obs, task, step_values)`` so
the same code trains either generator head, or an oracle stub in tests.
"""

from typing import TYPE_CHECKING, Optional
import logging

import numpy as np

from ..core.errors import ContractError, ShapeError
from ..numerics import Tensor, mean, squared_error
from .schedule import FLOW_TIME_SCALE, FlowConfig, NoiseSchedule, q_sample

if TYPE_CHECKING:
    from ..data.chunks import ChunkBatch
    from ..models.dag import HeadFn

logger = logging.getLogger(__name__)


def _checked(batch: "ChunkBatch") -> int:
    size = len(batch)
    if size == 0:
        raise ContractError("loss needs a non-empty batch")
    return size


def _drop_task(task: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Zero the task one-hot of a random subset of rows."""
    if rate <= 0.0:
        return task
    keep = rng.random(task.shape[0]) >= rate
    return task * keep.reshape(-1, 1)


def diffusion_loss(
    batch: "ChunkBatch",
    head: "HeadFn",
    sched: NoiseSchedule,
    rng: np.random.Generator,
    steps: Optional[np.ndarray] = None,
    noise: Optional[np.ndarray] = None,
    cond_dropout: float = 0.0,
) -> Tensor:
    """
    Mean over the batch of ‖ε − ε̂(a^η, o, ℓ, η)‖² at uniformly drawn η.

    Args:
        batch: Normalized chunks with their conditioning
        head: Noise predictor
        sched: Noise schedule
        rng: Source of η and ε when not supplied
        steps: Optional fixed η per row
        noise: Optional fixed ε per row
        cond_dropout: Probability of zeroing a row's task one-hot

    Raises:
        ContractError: empty batch or step out of range
    """
    size = _checked(batch)
    if steps is None:
        steps = rng.integers(0, sched.n_steps, size=size)
    if noise is None:
        noise = rng.standard_normal(batch.actions.shape)
    if noise.shape != batch.actions.shape:
        raise ShapeError("noise must match the action batch", [noise.shape, batch.actions.shape])
    task = _drop_task(batch.task, cond_dropout, rng)

    noisy = q_sample(batch.actions, np.asarray(steps), noise, sched)
    pred = head(noisy, batch.obs, task, np.asarray(steps, dtype=np.float64))
    return mean(squared_error(pred, Tensor(noise)))


def flow_loss(
    batch: "ChunkBatch",
    head: "HeadFn",
    cfg: FlowConfig,
    rng: np.random.Generator,
    times: Optional[np.ndarray] = None,
    noise: Optional[np.ndarray] = None,
    cond_dropout: float = 0.0,
) -> Tensor:
    """
    Flow-matching loss on the linear path a^t = (1 − t)·ε + t·a⁰.

    The target velocity is a⁰ − ε; t is drawn uniformly from [0, 1).
    ``cfg`` fixes nothing about training but keeps the signature aligned
    with the sampler that will integrate the learned field.
    """
    size = _checked(batch)
    if times is None:
        times = rng.random(size)
    if noise is None:
        noise = rng.standard_normal(batch.actions.shape)
    if noise.shape != batch.actions.shape:
        raise ShapeError("noise must match the action batch", [noise.shape, batch.actions.shape])
    task = _drop_task(batch.task, cond_dropout, rng)

    t = np.asarray(times, dtype=np.float64).reshape(-1, 1)
    noisy = Tensor((1.0 - t) * noise + t * batch.actions)
    target = Tensor(batch.actions - noise)
    pred = head(noisy, batch.obs, task, t.reshape(-1) * FLOW_TIME_SCALE)
    return mean(squared_error(pred, target))
