"""
Score Function: Bind a model, a conditioning and a GuidanceSpec into the
per-step callback consumed by the sampler.
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Union
import logging

import numpy as np

from ..core.errors import ConfigError, ContractError, ShapeError
from ..generative.schedule import FLOW_TIME_SCALE, Process, process_mode
from ..numerics import Tensor
from .combiners import adaptive_lambda, cfg_combine, cosine, fi_combine_static, np_combine
from .spec import GuidanceKind, GuidanceSpec

if TYPE_CHECKING:
    from ..models.dag import Conditioning, DagModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GuidanceRecord:
    """One sampler step of a guided query."""
    query: int
    step: float
    cos: float
    lam: float


def check_guidance(model: "DagModel", spec: GuidanceSpec, process: Optional[Process] = None) -> None:
    """
    Reject spec/model combinations that cannot be sampled.

    Raises:
        ConfigError: mode mismatch, untrained failure head, or a null-task
            branch the model was never trained for
    """
    if process is not None and process_mode(process) != model.mode:
        raise ConfigError(f"model trained for {model.mode} cannot drive a {process_mode(process)} sampler")
    if spec.uses_failure_head or spec.kind == GuidanceKind.NP:
        if "fail" not in model.trained_heads:
            raise ConfigError(f"{spec.kind.value} guidance needs a trained failure head")
    if spec.uses_null_condition and model.settings.cond_dropout <= 0.0:
        raise ConfigError(f"{spec.kind.value} guidance needs a model trained with cond_dropout > 0")


class GuidedScoreFn:
    """
    Sampler callback ``fn(a, step) -> Tensor``.

    ``none`` runs one success-head pass per step; the failure-informed kinds
    run the trunk once and read both heads. The callback may carry a batch of
    independent queries: the noisy action is then the concatenation of one
    chunk per observation row, and the adaptive scale is computed per row.
    Every step of a guided kind is appended to ``trace``, averaged over rows.
    """

    def __init__(
        self,
        model: "DagModel",
        cond: "Conditioning",
        spec: GuidanceSpec,
        process: Optional[Process] = None,
        query: int = 0,
        observations: Optional[np.ndarray] = None,
    ):
        check_guidance(model, spec, process)
        obs = cond.observation.reshape(1, -1) if observations is None else np.asarray(observations, dtype=np.float64)
        if obs.ndim != 2 or obs.shape[1] != model.obs_dim:
            raise ShapeError("conditioning observation does not match the model", [obs.shape])
        if np.any(np.abs(obs) > 1.0 + 1e-9):
            raise ContractError("observations must be normalized to [-1, 1]")
        self.model = model
        self.spec = spec
        self.query = query
        self.rows = obs.shape[0]
        self.trace: List[GuidanceRecord] = []
        self._obs = obs
        self._task = np.repeat(cond.task.reshape(1, -1), self.rows, axis=0)
        self._null_task = np.zeros_like(self._task)
        self._time_scale = FLOW_TIME_SCALE if model.mode == "flow" else 1.0

    def _succ(self, noisy: np.ndarray, task: np.ndarray, steps: np.ndarray) -> np.ndarray:
        return self.model.predict_batch("succ", noisy, self._obs, task, steps).data

    def _cosines(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.array([cosine(a[i], b[i], self.spec.cos_floor) for i in range(self.rows)])

    def __call__(self, noisy_action: Tensor, step: Union[int, float]) -> Tensor:
        if noisy_action.data.size != self.rows * self.model.action_size:
            raise ShapeError("noisy action does not match the query batch", [noisy_action.data.shape])
        noisy = noisy_action.data.reshape(self.rows, -1)
        steps = np.full(self.rows, float(step) * self._time_scale)
        kind = self.spec.kind

        if kind == GuidanceKind.NONE:
            return Tensor(self._succ(noisy, self._task, steps).reshape(-1))

        if kind == GuidanceKind.CFG:
            s_c = self._succ(noisy, self._task, steps)
            s_uc = self._succ(noisy, self._null_task, steps)
            self._record(step, self._cosines(s_c, s_uc), self.spec.lam)
            return _flat(cfg_combine(s_uc, s_c, self.spec.lam))

        if kind == GuidanceKind.NP:
            s_uc = self._succ(noisy, self._null_task, steps)
            s_neg = self.model.predict_batch("fail", noisy, self._obs, self._task, steps).data
            self._record(step, self._cosines(s_uc, s_neg), self.spec.lam)
            return _flat(np_combine(s_uc, s_neg, self.spec.lam))

        s_out, f_out = self.model.predict_pair(noisy, self._obs, self._task, steps)
        eps_s, eps_f = s_out.data, f_out.data
        cos = self._cosines(eps_s, eps_f)
        if kind == GuidanceKind.STATIC_FI:
            lam: Union[float, np.ndarray] = self.spec.lam
        else:
            lam = np.array(
                [adaptive_lambda(eps_s[i], eps_f[i], self.spec.alpha, self.spec.cos_floor) for i in range(self.rows)]
            )
        self._record(step, cos, lam)
        row_lam = lam.reshape(-1, 1) if isinstance(lam, np.ndarray) else lam
        return _flat(fi_combine_static(eps_s, eps_f, row_lam))

    def _record(self, step: Union[int, float], cos: np.ndarray, lam: Union[float, np.ndarray]) -> None:
        self.trace.append(GuidanceRecord(self.query, float(step), float(np.mean(cos)), float(np.mean(lam))))


def _flat(out: Tensor) -> Tensor:
    return Tensor(out.data.reshape(-1))


def make_score_fn(
    model: "DagModel",
    cond: "Conditioning",
    spec: GuidanceSpec,
    process: Optional[Process] = None,
    query: int = 0,
) -> GuidedScoreFn:
    """
    Build the guided callback for one policy query.

    Raises:
        ConfigError: spec and model are incompatible
    """
    return GuidedScoreFn(model, cond, spec, process, query)


def make_batch_score_fn(
    model: "DagModel",
    observations: np.ndarray,
    task: np.ndarray,
    spec: GuidanceSpec,
    process: Optional[Process] = None,
    query: int = 0,
) -> GuidedScoreFn:
    """
    Build one callback for ``len(observations)`` independent queries sharing a task.

    The sampler must then draw ``len(observations) * model.action_size``
    values; row ``i`` of the result is the chunk for observation ``i``.

    Raises:
        ConfigError: spec and model are incompatible
        ShapeError: observations are not (n, obs_dim)
        ContractError: task is not one-hot, or observations are not normalized
    """
    from ..models.dag import Conditioning

    obs = np.asarray(observations, dtype=np.float64)
    if obs.ndim != 2 or len(obs) == 0:
        raise ShapeError("observations must be a non-empty (n, obs_dim) array", [obs.shape])
    return GuidedScoreFn(model, Conditioning(obs[0], task), spec, process, query, observations=obs)
