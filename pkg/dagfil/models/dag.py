"""
Dual Action Generator: Shared trunk with success and failure generator heads.

The trunk encodes (observation, task, noisy action chunk, step embedding)
into a feature h; each head maps h to a noise (diffusion) or velocity
(flow) prediction over the flattened d×H action chunk. Both heads read the
same trunk parameters, so a loss through either head updates the trunk and
that head only.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Set, Tuple, Union
import copy
import hashlib
import logging

import numpy as np

from ..core.config import ModelSettings
from ..core.errors import ContractError, ShapeError
from ..data.stats import DatasetStats
from ..numerics import Parameter, Tensor, matmul, tanh

logger = logging.getLogger(__name__)

HEADS = ("succ", "fail")

# Heads are called as head(noisy, obs, task, step_values) on batched arrays.
HeadFn = Callable[[Tensor, np.ndarray, np.ndarray, np.ndarray], Tensor]


def sinusoidal_embedding(steps: np.ndarray, dim: int) -> np.ndarray:
    """
    Sinusoidal embedding of step values.

    Args:
        steps: (B,) diffusion steps or scaled flow times
        dim: even embedding width

    Returns:
        (B, dim) array of [sin, cos] features
    """
    half = dim // 2
    freqs = np.exp(-np.log(10000.0) * np.arange(half, dtype=np.float64) / half)
    angles = np.asarray(steps, dtype=np.float64).reshape(-1, 1) * freqs.reshape(1, -1)
    return np.concatenate([np.sin(angles), np.cos(angles)], axis=1)


@dataclass(frozen=True)
class Conditioning:
    """Normalized observation, task one-hot and step for a single query."""
    observation: np.ndarray
    task: np.ndarray
    diffusion_step: Union[int, float] = 0

    def __post_init__(self) -> None:
        task = np.asarray(self.task, dtype=np.float64)
        if task.ndim != 1 or np.count_nonzero(task == 1.0) != 1 or np.count_nonzero(task) != 1:
            raise ContractError(f"task must be a one-hot vector, got {task.tolist()}")
        obs = np.asarray(self.observation, dtype=np.float64)
        if obs.ndim != 1:
            raise ShapeError("observation must be a vector", [obs.shape])
        if np.any(np.abs(obs) > 1.0 + 1e-9):
            raise ContractError("observation must be normalized to [-1, 1]")
        object.__setattr__(self, "observation", obs)
        object.__setattr__(self, "task", task)

    def at_step(self, step: Union[int, float]) -> "Conditioning":
        """Same conditioning at another diffusion step."""
        return Conditioning(self.observation, self.task, step)


class Linear:
    """Affine layer; the bias is broadcast over the batch by a ones column."""

    def __init__(self, name: str, fan_in: int, fan_out: int, rng: np.random.Generator, zero: bool = False):
        bound = 1.0 / np.sqrt(fan_in)
        if zero:
            weight = np.zeros((fan_in, fan_out))
            bias = np.zeros((1, fan_out))
        else:
            weight = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            bias = rng.uniform(-bound, bound, size=(1, fan_out))
        self.weight = Parameter(weight, f"{name}.weight")
        self.bias = Parameter(bias, f"{name}.bias")

    def __call__(self, x: Tensor) -> Tensor:
        ones = Tensor(np.ones((x.shape[0], 1)))
        return matmul(x, self.weight) + matmul(ones, self.bias)

    def parameters(self) -> List[Parameter]:
        return [self.weight, self.bias]


class DagModel:
    """
    Shared trunk plus success/failure heads.

    Final layers of both heads start at zero, so untrained predictions are
    zero. With ``tie_heads`` the failure head starts as an exact copy of the
    success head.
    """

    def __init__(self, settings: ModelSettings, obs_dim: int, seed: int = 0, tie_heads: bool = True):
        if obs_dim <= 0:
            raise ContractError(f"obs_dim must be positive, got {obs_dim}")
        self.settings = settings
        self.obs_dim = obs_dim
        self.seed = seed
        self.stats: Optional[DatasetStats] = None
        self.trained_heads: Set[str] = set()
        self.process: Dict[str, Any] = {}

        rng = np.random.default_rng(seed)
        hidden = settings.hidden_dim
        self.trunk = [
            Linear("trunk.0", self.input_dim, hidden, rng),
            Linear("trunk.1", hidden, hidden, rng),
        ]
        self.heads: Dict[str, List[Linear]] = {"succ": self._build_head("succ", rng)}
        if tie_heads:
            self.heads["fail"] = self._clone_head("succ", "fail")
        else:
            self.heads["fail"] = self._build_head("fail", rng)

    @property
    def action_size(self) -> int:
        """Flattened chunk width d×H."""
        return self.settings.action_dim * self.settings.horizon

    @property
    def input_dim(self) -> int:
        s = self.settings
        return self.obs_dim + s.task_dim + self.action_size + s.step_embed_dim

    @property
    def mode(self) -> str:
        return self.settings.mode

    def _build_head(self, head: str, rng: np.random.Generator) -> List[Linear]:
        hidden = self.settings.hidden_dim
        return [
            Linear(f"{head}.0", hidden, hidden, rng),
            Linear(f"{head}.1", hidden, self.action_size, rng, zero=True),
        ]

    def _clone_head(self, source: str, target: str) -> List[Linear]:
        layers = []
        for layer in self.heads[source]:
            clone = copy.copy(layer)
            clone.weight = Parameter(layer.weight.data, layer.weight.name.replace(source, target, 1))
            clone.bias = Parameter(layer.bias.data, layer.bias.name.replace(source, target, 1))
            layers.append(clone)
        return layers

    def reset_head(self, head: str, seed: int) -> None:
        """Re-initialize one head from a fresh generator."""
        self._check_head(head)
        self.heads[head] = self._build_head(head, np.random.default_rng(seed))
        self.trained_heads.discard(head)
        logger.info(f"Re-initialized {head} head (seed={seed})")

    def parameters(self, group: Optional[str] = None) -> List[Parameter]:
        """Parameters of the trunk, one head, or everything."""
        if group == "trunk":
            return [p for layer in self.trunk for p in layer.parameters()]
        if group is not None:
            self._check_head(group)
            return [p for layer in self.heads[group] for p in layer.parameters()]
        params = self.parameters("trunk")
        for head in HEADS:
            params.extend(self.parameters(head))
        return params

    def parameter_count(self, group: Optional[str] = None) -> int:
        return sum(p.size for p in self.parameters(group))

    def digest(self, group: Optional[str] = None) -> str:
        """SHA-256 over the raw bytes of a parameter group."""
        h = hashlib.sha256()
        for p in self.parameters(group):
            h.update(p.name.encode("utf-8"))
            h.update(np.ascontiguousarray(p.data).tobytes())
        return h.hexdigest()

    def _check_head(self, head: str) -> None:
        if head not in HEADS:
            raise ContractError(f"unknown head {head!r}; expected one of {HEADS}")

    def _trunk_input(
        self, noisy: np.ndarray, obs: np.ndarray, task: np.ndarray, steps: np.ndarray
    ) -> np.ndarray:
        batch = noisy.shape[0]
        expected = [
            (noisy.shape, (batch, self.action_size)),
            (obs.shape, (batch, self.obs_dim)),
            (task.shape, (batch, self.settings.task_dim)),
        ]
        for got, want in expected:
            if got != want:
                raise ShapeError("model input has wrong shape", [got, want])
        steps = np.asarray(steps, dtype=np.float64).reshape(-1)
        if steps.shape[0] != batch:
            raise ShapeError("one step value per batch row is required", [steps.shape, (batch,)])
        emb = sinusoidal_embedding(steps, self.settings.step_embed_dim)
        return np.concatenate([obs, task, noisy, emb], axis=1)

    def encode_batch(
        self, noisy: Union[Tensor, np.ndarray], obs: np.ndarray, task: np.ndarray, steps: np.ndarray
    ) -> Tensor:
        """Trunk features for a batch of queries."""
        noisy_arr = noisy.data if isinstance(noisy, Tensor) else np.asarray(noisy, dtype=np.float64)
        if noisy_arr.ndim != 2:
            raise ShapeError("noisy actions must be (batch, d*H)", [noisy_arr.shape])
        x = Tensor(self._trunk_input(noisy_arr, np.asarray(obs), np.asarray(task), steps))
        for layer in self.trunk:
            x = tanh(layer(x))
        return x

    def head_forward(self, head: str, h: Tensor) -> Tensor:
        """Apply one head to trunk features."""
        self._check_head(head)
        first, last = self.heads[head]
        return last(tanh(first(h)))

    def predict_batch(
        self,
        head: str,
        noisy: Union[Tensor, np.ndarray],
        obs: np.ndarray,
        task: np.ndarray,
        steps: np.ndarray,
    ) -> Tensor:
        """Batched prediction through one head, (B, d*H)."""
        return self.head_forward(head, self.encode_batch(noisy, obs, task, steps))

    def predict_pair(
        self,
        noisy: Union[Tensor, np.ndarray],
        obs: np.ndarray,
        task: np.ndarray,
        steps: np.ndarray,
    ) -> Tuple[Tensor, Tensor]:
        """Success and failure predictions sharing one trunk pass."""
        h = self.encode_batch(noisy, obs, task, steps)
        return self.head_forward("succ", h), self.head_forward("fail", h)

    def head_fn(self, head: str) -> HeadFn:
        """Bind a head as a loss-compatible callable."""
        self._check_head(head)

        def fn(noisy: Tensor, obs: np.ndarray, task: np.ndarray, steps: np.ndarray) -> Tensor:
            return self.predict_batch(head, noisy, obs, task, steps)

        return fn

    def copy(self) -> "DagModel":
        """Deep copy with independent parameters."""
        return copy.deepcopy(self)


def _single(noisy_action: Union[Tensor, np.ndarray], cond: Conditioning, model: DagModel) -> Tuple[np.ndarray, ...]:
    noisy = noisy_action.data if isinstance(noisy_action, Tensor) else np.asarray(noisy_action, dtype=np.float64)
    if noisy.shape != (model.action_size,):
        raise ShapeError("noisy action must be a flattened chunk", [noisy.shape, (model.action_size,)])
    return (
        noisy.reshape(1, -1),
        cond.observation.reshape(1, -1),
        cond.task.reshape(1, -1),
        np.array([float(cond.diffusion_step)]),
    )


def encode(cond: Conditioning, model: DagModel, noisy_action: Optional[Union[Tensor, np.ndarray]] = None) -> Tensor:
    """
    Trunk feature h for one conditioning.

    Without ``noisy_action`` a zero chunk stands in for the action input.
    """
    if noisy_action is None:
        noisy_action = np.zeros(model.action_size)
    noisy, obs, task, steps = _single(noisy_action, cond, model)
    return model.encode_batch(noisy, obs, task, steps).detach()


def predict_succ(noisy_action: Union[Tensor, np.ndarray], cond: Conditioning, model: DagModel) -> Tensor:
    """Success-head noise/velocity prediction, shape (d*H,)."""
    noisy, obs, task, steps = _single(noisy_action, cond, model)
    out = model.predict_batch("succ", noisy, obs, task, steps)
    return Tensor(out.data.reshape(-1))


def predict_fail(noisy_action: Union[Tensor, np.ndarray], cond: Conditioning, model: DagModel) -> Tensor:
    """Failure-head noise/velocity prediction, shape (d*H,)."""
    noisy, obs, task, steps = _single(noisy_action, cond, model)
    out = model.predict_batch("fail", noisy, obs, task, steps)
    return Tensor(out.data.reshape(-1))


def task_one_hot(index: int, task_dim: int) -> np.ndarray:
    """One-hot task vector."""
    if not 0 <= index < task_dim:
        raise ContractError(f"task index {index} outside [0, {task_dim})")
    out = np.zeros(task_dim)
    out[index] = 1.0
    return out
