"""
Arena: Deterministic toy manipulation tasks on the unit square.

An agent moves in [0, 1]² by bounded per-step displacements and carries
objects with a level-triggered gripper channel. Axis-aligned trap regions
stand in for failure-prone regions: carrying an object into one (or, for
reach, entering one at all) ends the episode as a failure.

Actions are 3-vectors (dx, dy, grip); the gripper is closed on a step when
grip > 0.5.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from ..core.config import EnvSettings
from ..core.errors import ContractError, NumericError, PlanError, ShapeError
from .planner import Point, Rect, path_steps, plan_path

logger = logging.getLogger(__name__)

ACTION_DIM = 3
GRIP_THRESHOLD = 0.5
# Fraction of the horizon an expert plan may use on a generated config.
EXPERT_BUDGET = 0.6
MAX_RESET_ATTEMPTS = 1000


class TaskId(str, Enum):
    """Toy task families."""
    REACH = "reach"
    PICK_PLACE = "pick_place"
    TWO_OBJECT_SEQUENCE = "two_object_sequence"


TASK_CODES = {TaskId.REACH: 0, TaskId.PICK_PLACE: 1, TaskId.TWO_OBJECT_SEQUENCE: 2}
N_OBJECTS = {TaskId.REACH: 0, TaskId.PICK_PLACE: 1, TaskId.TWO_OBJECT_SEQUENCE: 2}


class StepOutcome(str, Enum):
    """Per-step episode status; terminal statuses absorb."""
    RUNNING = "running"
    SUCCESS = "success"
    FAILURE = "failure"


@dataclass(frozen=True)
class TaskSpec:
    """A task family with its horizon and arena parameters."""
    task_id: TaskId
    index: int
    horizon_limit: int
    settings: EnvSettings

    @property
    def n_objects(self) -> int:
        return N_OBJECTS[self.task_id]

    @property
    def name(self) -> str:
        return self.task_id.value


def make_task_spec(name: str, settings: EnvSettings) -> TaskSpec:
    """
    Build a TaskSpec; the task index is the position in ``settings.tasks``.

    Raises:
        ContractError: task not configured
    """
    task_id = TaskId(name)
    if task_id.value not in settings.tasks:
        raise ContractError(f"task {name!r} is not in the configured task list {settings.tasks}")
    horizon = settings.horizon_long if task_id == TaskId.TWO_OBJECT_SEQUENCE else settings.horizon_short
    index = settings.tasks.index(task_id.value)
    return TaskSpec(task_id=task_id, index=index, horizon_limit=horizon, settings=settings)


def obs_dim(settings: EnvSettings) -> int:
    """Observation width: agent, holding, progress, 2 objects, 2 goals, traps."""
    return 2 + 1 + 1 + 4 + 4 + 4 * settings.max_traps


@dataclass(frozen=True)
class EnvState:
    """
    Immutable arena state.

    ``objects`` and ``goals`` are ordered; ``active`` indexes the object
    currently being handled and counts the objects already placed. Reach
    has no objects and a single goal.
    """
    agent_pos: Point
    objects: Tuple[Point, ...]
    goals: Tuple[Point, ...]
    traps: Tuple[Rect, ...]
    holding: bool = False
    active: int = 0
    step_count: int = 0
    outcome: StepOutcome = StepOutcome.RUNNING

    def __post_init__(self) -> None:
        for p in (self.agent_pos, *self.objects, *self.goals):
            if not (0.0 <= p[0] <= 1.0 and 0.0 <= p[1] <= 1.0):
                raise ContractError(f"position {p} lies outside the arena")
        if self.holding and self.active >= len(self.objects):
            raise ContractError("holding requires an active object")

    @property
    def object_pos(self) -> Optional[Point]:
        """Active object position, or None when nothing is left to carry."""
        return self.objects[self.active] if self.active < len(self.objects) else None

    @property
    def goal_pos(self) -> Point:
        return self.goals[min(self.active, len(self.goals) - 1)]

    @property
    def trap_regions(self) -> Tuple[Rect, ...]:
        return self.traps

    @property
    def terminal(self) -> bool:
        return self.outcome != StepOutcome.RUNNING

    def in_trap(self) -> bool:
        return any(r.contains(self.agent_pos) for r in self.traps)


def observe(state: EnvState, spec: TaskSpec) -> np.ndarray:
    """Fixed-layout observation vector in arena units."""
    max_traps = spec.settings.max_traps
    obs = np.zeros(obs_dim(spec.settings))
    obs[0:2] = state.agent_pos
    obs[2] = 1.0 if state.holding else 0.0
    obs[3] = float(state.active)
    for i, p in enumerate(state.objects[:2]):
        obs[4 + 2 * i: 6 + 2 * i] = p
    for i, p in enumerate(state.goals[:2]):
        obs[8 + 2 * i: 10 + 2 * i] = p
    for i, r in enumerate(state.traps[:max_traps]):
        obs[12 + 4 * i: 16 + 4 * i] = r.as_tuple()
    return obs


def _dist(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def task_succeeded(state: EnvState, spec: TaskSpec) -> bool:
    if spec.task_id == TaskId.REACH:
        return _dist(state.agent_pos, state.goals[0]) < spec.settings.goal_radius
    return state.active >= spec.n_objects


def step(state: EnvState, action: Sequence[float], spec: TaskSpec) -> Tuple[EnvState, bool, StepOutcome]:
    """
    Apply one timestep.

    Displacements are clipped to [-max_step, max_step] and the agent to the
    arena. A closed gripper within grasp_radius of the active object grasps
    it; opening the gripper releases it, and a release within goal_radius of
    the object's goal places it. Terminal states are returned unchanged.
    """
    if state.terminal:
        return state, True, state.outcome
    a = np.nan_to_num(np.asarray(action, dtype=np.float64).reshape(-1), nan=0.0)
    if a.shape != (ACTION_DIM,):
        raise ShapeError("action must be (dx, dy, grip)", [a.shape])

    cfg = spec.settings
    move = np.clip(a[:2], -cfg.max_step, cfg.max_step)
    agent: Point = (
        float(np.clip(state.agent_pos[0] + move[0], 0.0, 1.0)),
        float(np.clip(state.agent_pos[1] + move[1], 0.0, 1.0)),
    )
    closed = bool(a[2] > GRIP_THRESHOLD)
    objects = list(state.objects)
    holding, active = state.holding, state.active

    if holding:
        objects[active] = agent
    if spec.task_id != TaskId.REACH:
        if holding and not closed:
            holding = False
            if _dist(objects[active], state.goals[active]) < cfg.goal_radius:
                active += 1
        elif not holding and closed and active < len(objects):
            if _dist(agent, objects[active]) < cfg.grasp_radius:
                holding = True
                objects[active] = agent

    nxt = replace(
        state,
        agent_pos=agent,
        objects=tuple(objects),
        holding=holding,
        active=active,
        step_count=state.step_count + 1,
    )
    # A release inside a trap still counts as carrying into it; the object lands where the agent is.
    carrying = state.holding or holding
    if nxt.in_trap() and (carrying or spec.task_id == TaskId.REACH):
        outcome = StepOutcome.FAILURE
    elif task_succeeded(nxt, spec):
        outcome = StepOutcome.SUCCESS
    elif nxt.step_count >= spec.horizon_limit:
        outcome = StepOutcome.FAILURE
    else:
        outcome = StepOutcome.RUNNING
    nxt = replace(nxt, outcome=outcome)
    return nxt, outcome != StepOutcome.RUNNING, outcome


def remaining_legs(state: EnvState, spec: TaskSpec) -> List[Tuple[Point, Point, bool]]:
    """
    Straight-line legs an expert still has to cover, as (start, end, carrying).
    """
    if spec.task_id == TaskId.REACH:
        return [(state.agent_pos, state.goals[0], True)]
    legs = []
    pos = state.agent_pos
    for i in range(state.active, spec.n_objects):
        if not (i == state.active and state.holding):
            legs.append((pos, state.objects[i], False))
            pos = state.objects[i]
        legs.append((pos, state.goals[i], True))
        pos = state.goals[i]
    return legs


def expert_steps_needed(state: EnvState, spec: TaskSpec) -> int:
    """
    Steps the scripted expert needs from ``state``.

    Raises:
        PlanError: a leg has no collision-free path
    """
    cfg = spec.settings
    total = 0
    for start, end, _ in remaining_legs(state, spec):
        total += path_steps(plan_path(start, end, state.traps, cfg.grasp_radius), cfg.max_step)
    if spec.task_id != TaskId.REACH:
        remaining = spec.n_objects - state.active
        total += 2 * remaining - (1 if state.holding else 0)
    return total


def _uniform_point(rng: np.random.Generator, lo: float = 0.1, hi: float = 0.9) -> Point:
    x, y = rng.uniform(lo, hi, size=2)
    return (float(x), float(y))


def _sample_traps(rng: np.random.Generator, settings: EnvSettings) -> Tuple[Rect, ...]:
    if settings.ood:
        n, lo, hi = settings.max_traps, 0.12, 0.26
    else:
        n, lo, hi = int(rng.integers(0, settings.max_traps)), 0.06, 0.18
    traps = []
    for _ in range(n):
        w, h = rng.uniform(lo, hi, size=2)
        x0, y0 = rng.uniform(0.05, 0.95 - w), rng.uniform(0.05, 0.95 - h)
        traps.append(Rect(float(x0), float(y0), float(x0 + w), float(y0 + h)))
    return tuple(traps)


def _sample_layout(rng: np.random.Generator, spec: TaskSpec) -> EnvState:
    traps = _sample_traps(rng, spec.settings)
    n_points = 1 + spec.n_objects + max(spec.n_objects, 1)
    points = [_uniform_point(rng) for _ in range(n_points)]
    agent = points[0]
    objects = tuple(points[1: 1 + spec.n_objects])
    goals = tuple(points[1 + spec.n_objects:])
    return EnvState(agent_pos=agent, objects=objects, goals=goals, traps=traps)


def _layout_ok(state: EnvState, spec: TaskSpec) -> bool:
    cfg = spec.settings
    points = [state.agent_pos, *state.objects, *state.goals]
    for p in points:
        if any(r.distance(p) < 2.0 * cfg.grasp_radius for r in state.traps):
            return False
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if _dist(points[i], points[j]) < 0.15:
                return False
    try:
        needed = expert_steps_needed(state, spec)
    except PlanError:
        return False
    return needed <= EXPERT_BUDGET * spec.horizon_limit


def reset(spec: TaskSpec, config_id: int, run_seed: int = 0) -> EnvState:
    """
    Initial state for a config id.

    The layout depends only on the task, the config id and the OOD flag;
    ``run_seed`` is accepted so callers can pass the (config, run) pair, but
    runs differ only through policy stochasticity. Layouts where objects or
    goals touch a trap, or where the expert plan does not fit the horizon
    budget, are rejected and resampled.
    """
    seq = np.random.SeedSequence([TASK_CODES[spec.task_id], int(config_id), int(spec.settings.ood)])
    rng = np.random.default_rng(seq)
    for attempt in range(MAX_RESET_ATTEMPTS):
        state = _sample_layout(rng, spec)
        if _layout_ok(state, spec):
            return state
        logger.debug(f"Rejected {spec.name} config {config_id} layout (attempt {attempt})")
    raise PlanError(f"no feasible {spec.name} layout for config {config_id}")


@dataclass
class EpisodeContext:
    """Per-episode resources handed to a policy: its generator and a trace sink."""
    rng: np.random.Generator
    trace: List[Any] = field(default_factory=list)
    query: int = 0


Policy = Callable[[EnvState, TaskSpec, EpisodeContext], np.ndarray]


@dataclass
class Episode:
    """Executed steps: observation before each action, the action, and the final state."""
    observations: List[np.ndarray]
    actions: List[np.ndarray]
    final: EnvState
    numeric_fault: bool = False

    @property
    def outcome(self) -> StepOutcome:
        if self.numeric_fault:
            return StepOutcome.FAILURE
        return self.final.outcome

    def __len__(self) -> int:
        return len(self.actions)


def execute(state: EnvState, spec: TaskSpec, policy: Policy, ctx: EpisodeContext) -> Episode:
    """
    Run a policy to termination, executing each chunk open-loop.

    A NumericError raised by the policy ends the episode as a failure with
    ``numeric_fault`` set.
    """
    observations: List[np.ndarray] = []
    actions: List[np.ndarray] = []
    while not state.terminal:
        try:
            chunk = np.asarray(policy(state, spec, ctx), dtype=np.float64)
        except NumericError as e:
            logger.warning(f"Numeric fault in {spec.name} episode at step {state.step_count}: {e}")
            return Episode(observations, actions, state, numeric_fault=True)
        ctx.query += 1
        if chunk.ndim != 2 or chunk.shape[0] == 0 or chunk.shape[1] != ACTION_DIM:
            raise ShapeError("policy must return a non-empty (H, 3) chunk", [chunk.shape])
        for action in chunk:
            observations.append(observe(state, spec))
            actions.append(action.copy())
            state, terminal, _ = step(state, action, spec)
            if terminal:
                break
    return Episode(observations, actions, state)
