"""
Policies: Wrap a trained model and a guidance spec as a rollout policy.
"""

from typing import Optional
import logging

import numpy as np

from ..core.errors import ContractError
from ..envs.arena import ACTION_DIM, EnvState, EpisodeContext, TaskSpec, observe
from ..generative.sampler import sample
from ..generative.schedule import FlowConfig, NoiseSchedule, Process, process_from_dict
from ..guidance.score_fn import check_guidance, make_score_fn
from ..guidance.spec import GuidanceSpec
from ..models.dag import Conditioning, DagModel, task_one_hot

logger = logging.getLogger(__name__)


def default_process(model: DagModel) -> Process:
    """The process recorded with the model, or the default for its mode."""
    process = process_from_dict(model.process)
    if process is not None:
        return process
    return FlowConfig.uniform() if model.mode == "flow" else NoiseSchedule.linear()


class ModelPolicy:
    """
    Sample one guided action chunk per query.

    The model is only read, so one instance can serve concurrent episodes;
    per-episode state lives in the EpisodeContext.
    """

    def __init__(
        self,
        model: DagModel,
        guidance: Optional[GuidanceSpec] = None,
        process: Optional[Process] = None,
        clip: Optional[float] = 3.0,
    ):
        if model.stats is None:
            raise ContractError("model has no normalization statistics")
        if model.settings.action_dim != ACTION_DIM:
            raise ContractError(f"arena actions have {ACTION_DIM} channels, model has {model.settings.action_dim}")
        self.model = model
        self.guidance = guidance or GuidanceSpec()
        self.process = process or default_process(model)
        self.clip = clip
        check_guidance(model, self.guidance, self.process)

    def __call__(self, state: EnvState, spec: TaskSpec, ctx: EpisodeContext) -> np.ndarray:
        stats = self.model.stats
        obs = stats.normalize_obs(observe(state, spec))
        cond = Conditioning(obs, task_one_hot(spec.index, self.model.settings.task_dim))
        score_fn = make_score_fn(self.model, cond, self.guidance, self.process, query=ctx.query)
        chunk = sample(score_fn, self.process, ctx.rng, self.model.action_size, stats=stats, clip=self.clip)
        ctx.trace.extend(score_fn.trace)
        return chunk.data.reshape(self.model.settings.horizon, ACTION_DIM)
