"""
Trainer: Success-only training and joint dual-head training.

Both loops minimize the generative objective of the model's mode. A
success batch updates the trunk and the success head; a failure batch
updates the trunk and the failure head. The optimizer skips any parameter
that received no gradient, so a step through one head never moves the
other.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union
from pathlib import Path
import logging
import math

import numpy as np

from ..core.config import OptimizerSettings
from ..core.errors import ContractError, NumericError, TrainingDivergedError
from ..data.chunks import ChunkBatch
from ..generative.losses import diffusion_loss, flow_loss
from ..generative.schedule import NoiseSchedule, Process, process_mode
from ..models.checkpoint import save_checkpoint
from ..models.dag import DagModel
from ..numerics import Adam, Tensor, backward

logger = logging.getLogger(__name__)


@dataclass
class TrainingHistory:
    """Loss curves per head as (step, loss) pairs, and written checkpoints."""
    losses: Dict[str, List[Tuple[int, float]]] = field(default_factory=lambda: {"succ": [], "fail": []})
    checkpoints: List[Path] = field(default_factory=list)

    def record(self, head: str, step: int, loss: float) -> None:
        self.losses[head].append((step, loss))

    def first(self, head: str) -> float:
        return self.losses[head][0][1]

    def last(self, head: str) -> float:
        return self.losses[head][-1][1]


class _Loop:
    """Shared machinery: loss evaluation, updates, logging and checkpoints."""

    def __init__(
        self,
        model: DagModel,
        process: Process,
        opt: OptimizerSettings,
        seed: int,
        checkpoint_path: Optional[Union[str, Path]],
        freeze_trunk: bool,
        heads: Tuple[str, ...],
    ):
        if process_mode(process) != model.mode:
            raise ContractError(f"model mode {model.mode} does not match the {process_mode(process)} process")
        self.model = model
        self.process = process
        self.opt = opt
        self.rng = np.random.default_rng(seed)
        self.checkpoint_path = Path(checkpoint_path) if checkpoint_path is not None else None
        self.last_good: Optional[Path] = None
        self.history = TrainingHistory()

        params = [] if freeze_trunk else model.parameters("trunk")
        for head in heads:
            params.extend(model.parameters(head))
        self.optimizer = Adam(params, lr=opt.lr, beta1=opt.beta1, beta2=opt.beta2, eps=opt.eps)
        model.process = process.to_dict()

    def _loss(self, head: str, chunks: ChunkBatch) -> Tensor:
        batch = chunks.sample(self.rng, self.opt.batch_size)
        dropout = self.model.settings.cond_dropout if head == "succ" else 0.0
        fn = self.model.head_fn(head)
        if isinstance(self.process, NoiseSchedule):
            return diffusion_loss(batch, fn, self.process, self.rng, cond_dropout=dropout)
        return flow_loss(batch, fn, self.process, self.rng, cond_dropout=dropout)

    def update(self, head: str, chunks: ChunkBatch, step: int) -> float:
        try:
            loss = self._loss(head, chunks)
            value = loss.item()
            if not math.isfinite(value):
                raise NumericError(f"loss is {value}", op="loss")
            for p in self.model.parameters():
                p.zero_grad()
            backward(loss)
            self.optimizer.step()
        except NumericError as e:
            logger.error(f"Training diverged at step {step} ({head} head): {e}")
            raise TrainingDivergedError(
                f"{head} loss diverged at step {step}: {e}", checkpoint_path=self.last_good, step=step
            )
        finally:
            for p in self.model.parameters():
                p.zero_grad()
        self.history.record(head, step, value)
        return value

    def after_step(self, step: int, total: int) -> None:
        if step % self.opt.log_every == 0 or step == total:
            parts = ", ".join(
                f"{head}={curve[-1][1]:.5f}" for head, curve in self.history.losses.items() if curve
            )
            logger.info(f"step {step}/{total}: {parts}")
        if self.checkpoint_path is not None and (step % self.opt.checkpoint_every == 0 or step == total):
            self.last_good = save_checkpoint(self.model, self.checkpoint_path, self.model.process)
            if self.last_good not in self.history.checkpoints:
                self.history.checkpoints.append(self.last_good)


def train_success_only(
    chunks: ChunkBatch,
    model: DagModel,
    process: Process,
    opt: OptimizerSettings,
    steps: Optional[int] = None,
    seed: int = 0,
    checkpoint_path: Optional[Union[str, Path]] = None,
) -> TrainingHistory:
    """
    Train the trunk and success head on D_s; the failure head is untouched.

    Args:
        chunks: Success-split training rows
        model: Model to train in place
        process: Noise schedule or flow grid matching the model mode
        opt: Optimizer settings
        steps: Update count (default ``opt.success_steps``)
        seed: Seeds batch, step and noise draws
        checkpoint_path: Written every ``checkpoint_every`` steps and at the end

    Raises:
        ContractError: empty D_s or mode mismatch
        TrainingDivergedError: non-finite loss
    """
    if len(chunks) == 0:
        raise ContractError("success split is empty")
    total = steps if steps is not None else opt.success_steps
    loop = _Loop(model, process, opt, seed, checkpoint_path, freeze_trunk=False, heads=("succ",))
    for step in range(1, total + 1):
        loop.update("succ", chunks, step)
        if step == 1:
            model.trained_heads.add("succ")
        loop.after_step(step, total)
    return loop.history


def train_dag(
    success: ChunkBatch,
    failure: ChunkBatch,
    model: DagModel,
    process: Process,
    opt: OptimizerSettings,
    steps: Optional[int] = None,
    seed: int = 0,
    checkpoint_path: Optional[Union[str, Path]] = None,
    freeze_trunk: Optional[bool] = None,
) -> TrainingHistory:
    """
    Joint training with 1:1 alternation of success and failure batches.

    Each step is one success update followed by one failure update; the
    smaller split is simply resampled more often. With ``freeze_trunk`` only
    the heads move.

    Raises:
        ContractError: either split empty or mode mismatch
        TrainingDivergedError: non-finite loss
    """
    if len(success) == 0 or len(failure) == 0:
        raise ContractError("both training splits must be non-empty")
    total = steps if steps is not None else opt.dag_steps
    frozen = opt.freeze_trunk if freeze_trunk is None else freeze_trunk
    loop = _Loop(model, process, opt, seed, checkpoint_path, freeze_trunk=frozen, heads=("succ", "fail"))
    for step in range(1, total + 1):
        loop.update("succ", success, step)
        loop.update("fail", failure, step)
        if step == 1:
            model.trained_heads.update({"succ", "fail"})
        loop.after_step(step, total)
    return loop.history
