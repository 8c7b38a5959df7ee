"""Toy manipulation arena, scripted expert and replanning corrector."""

from .planner import Rect, path_length, path_steps, plan_path, segment_blocked
from .arena import (
    ACTION_DIM,
    TASK_CODES,
    Episode,
    EpisodeContext,
    EnvState,
    Policy,
    StepOutcome,
    TaskId,
    TaskSpec,
    execute,
    expert_steps_needed,
    make_task_spec,
    obs_dim,
    observe,
    remaining_legs,
    reset,
    step,
    task_succeeded,
)
from .expert import ExpertPolicy, NoisyExpertPolicy, expert_action, expert_policy, noisy_expert_policy, scripted_expert
from .correction import recoverable_indices, replan_correction, replay_states

__all__ = [
    "Rect",
    "path_length",
    "path_steps",
    "plan_path",
    "segment_blocked",
    "ACTION_DIM",
    "TASK_CODES",
    "Episode",
    "EpisodeContext",
    "EnvState",
    "Policy",
    "StepOutcome",
    "TaskId",
    "TaskSpec",
    "execute",
    "expert_steps_needed",
    "make_task_spec",
    "obs_dim",
    "observe",
    "remaining_legs",
    "reset",
    "step",
    "task_succeeded",
    "ExpertPolicy",
    "NoisyExpertPolicy",
    "expert_action",
    "expert_policy",
    "noisy_expert_policy",
    "scripted_expert",
    "recoverable_indices",
    "replan_correction",
    "replay_states",
]
