"""
Correction: Turn a failed rollout into a successful one by replanning.

The failure is replayed from its initial state; the latest step that is
outside every trap and still leaves the expert enough horizon is the
takeover point. The prefix up to that step is kept verbatim and the
scripted expert finishes the episode.
"""

from typing import List
import logging

import numpy as np

from ..core.errors import ContractError, NoCorrection, PlanError
from ..data.trajectory import Outcome, Trajectory
from .arena import EnvState, EpisodeContext, StepOutcome, TaskSpec, execute, expert_steps_needed, reset, step
from .expert import DEFAULT_CHUNK, ExpertPolicy

logger = logging.getLogger(__name__)

# Expert completions tried before giving up on a trajectory.
MAX_TAKEOVER_ATTEMPTS = 25


def replay_states(traj: Trajectory, spec: TaskSpec) -> List[EnvState]:
    """States before each step plus the final state (length len(traj) + 1)."""
    state = reset(spec, traj.config_id, traj.run)
    states = [state]
    for action in traj.actions:
        state, _, _ = step(state, action, spec)
        states.append(state)
    return states


def recoverable_indices(states: List[EnvState], spec: TaskSpec) -> List[int]:
    """Candidate takeover steps, latest first."""
    out = []
    for k in range(len(states) - 2, -1, -1):
        s = states[k]
        if s.terminal or s.in_trap():
            continue
        try:
            needed = expert_steps_needed(s, spec)
        except PlanError:
            continue
        if s.step_count + needed < spec.horizon_limit:
            out.append(k)
    return out


def replan_correction(traj: Trajectory, spec: TaskSpec, horizon: int = DEFAULT_CHUNK) -> Trajectory:
    """
    Corrected copy of a failed trajectory.

    Raises:
        ContractError: the trajectory is not a raw failure
        NoCorrection: no takeover point leads the expert to success
    """
    if traj.outcome != Outcome.FAILURE:
        raise ContractError(f"only raw failures can be corrected, got {traj.outcome.value} ({traj.uid})")
    if len(traj) == 0:
        raise NoCorrection("empty trajectory", uid=traj.uid)

    states = replay_states(traj, spec)
    expert = ExpertPolicy(horizon)
    for attempt, k in enumerate(recoverable_indices(states, spec)):
        if attempt >= MAX_TAKEOVER_ATTEMPTS:
            break
        try:
            tail = execute(states[k], spec, expert, EpisodeContext(rng=np.random.default_rng(0)))
        except PlanError:
            continue
        if tail.outcome != StepOutcome.SUCCESS or len(tail) == 0:
            continue
        corrected = Trajectory(
            task_id=traj.task_id,
            config_id=traj.config_id,
            seed=traj.seed,
            run=traj.run,
            observations=np.concatenate([traj.observations[:k], np.asarray(tail.observations)]),
            actions=np.concatenate([traj.actions[:k], np.asarray(tail.actions)]),
            outcome=Outcome.CORRECTED,
            correction_start=k,
        )
        logger.debug(f"Corrected {traj.uid} from step {k} ({len(tail)} expert steps)")
        return corrected

    raise NoCorrection(f"no recoverable prefix in {traj.uid}", uid=traj.uid)
