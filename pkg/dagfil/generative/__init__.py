"""Diffusion and flow-matching processes: schedules, losses and samplers."""

from .schedule import (
    FLOW_TIME_SCALE,
    FlowConfig,
    NoiseSchedule,
    Process,
    process_from_dict,
    process_mode,
    q_sample,
)
from .losses import diffusion_loss, flow_loss
from .sampler import ScoreFn, sample

__all__ = [
    "FLOW_TIME_SCALE",
    "FlowConfig",
    "NoiseSchedule",
    "Process",
    "process_from_dict",
    "process_mode",
    "q_sample",
    "diffusion_loss",
    "flow_loss",
    "ScoreFn",
    "sample",
]
