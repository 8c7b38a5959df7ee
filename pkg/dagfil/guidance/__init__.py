"""Guidance: score combiners and the guided sampler callback."""

from .spec import GuidanceKind, GuidanceSpec
from .combiners import (
    adaptive_lambda,
    cfg_combine,
    cosine,
    fi_combine_adaptive,
    fi_combine_hat,
    fi_combine_static,
    np_combine,
)
from .score_fn import GuidanceRecord, GuidedScoreFn, check_guidance, make_batch_score_fn, make_score_fn

__all__ = [
    "GuidanceKind",
    "GuidanceSpec",
    "adaptive_lambda",
    "cfg_combine",
    "cosine",
    "fi_combine_adaptive",
    "fi_combine_hat",
    "fi_combine_static",
    "np_combine",
    "GuidanceRecord",
    "GuidedScoreFn",
    "check_guidance",
    "make_batch_score_fn",
    "make_score_fn",
]
