"""Tests for the toy manipulation arena."""

import math

import numpy as np
import pytest

from dagfil.core.config import EnvSettings
from dagfil.core.errors import ContractError, ShapeError
from dagfil.envs.arena import (
    EnvState,
    StepOutcome,
    TaskId,
    expert_steps_needed,
    make_task_spec,
    obs_dim,
    observe,
    reset,
    step,
)
from dagfil.envs.planner import Rect


@pytest.fixture
def pick(env_settings):
    return make_task_spec("pick_place", env_settings)


@pytest.fixture
def reach(env_settings):
    return make_task_spec("reach", env_settings)


def _check_layout(state: EnvState, spec) -> None:
    cfg = spec.settings
    points = [state.agent_pos, *state.objects, *state.goals]
    assert len(state.objects) == spec.n_objects
    for p in points:
        assert 0.0 <= p[0] <= 1.0 and 0.0 <= p[1] <= 1.0
        assert all(r.distance(p) >= 2.0 * cfg.grasp_radius for r in state.traps)
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            assert math.dist(points[i], points[j]) >= 0.15
    assert expert_steps_needed(state, spec) <= 0.6 * spec.horizon_limit


class TestTaskSpec:
    """Test cases for make_task_spec and obs_dim."""

    def test_horizons(self, env_settings):
        """Two-object sequences get the long horizon."""
        assert make_task_spec("pick_place", env_settings).horizon_limit == 120
        assert make_task_spec("two_object_sequence", env_settings).horizon_limit == 240
        assert make_task_spec("reach", env_settings).index == 0

    def test_unconfigured_task(self):
        """Tasks must be listed in the settings."""
        with pytest.raises(ContractError):
            make_task_spec("reach", EnvSettings(tasks=["pick_place"]))

    def test_obs_dim(self, env_settings):
        """Three trap slots give 24 observation channels."""
        assert obs_dim(env_settings) == 24


class TestReset:
    """Test cases for reset."""

    def test_deterministic(self, pick):
        """The same config id gives the same layout."""
        assert reset(pick, 7) == reset(pick, 7)
        assert reset(pick, 7, run_seed=0) == reset(pick, 7, run_seed=2)

    def test_configs_differ(self, pick):
        """Fifty config ids give fifty distinct layouts."""
        layouts = {(reset(pick, c).agent_pos, reset(pick, c).objects) for c in range(50)}
        assert len(layouts) == 50

    @pytest.mark.parametrize("task", ["reach", "pick_place", "two_object_sequence"])
    def test_layout_invariants(self, env_settings, task):
        """Generated layouts keep their clearances and fit the expert budget."""
        spec = make_task_spec(task, env_settings)
        for config_id in range(100):
            state = reset(spec, config_id)
            _check_layout(state, spec)
            assert len(state.traps) < env_settings.max_traps
            assert state.step_count == 0 and not state.holding

    def test_ood_family(self):
        """The shifted family always places every trap."""
        settings = EnvSettings(tasks=["pick_place"], ood=True)
        spec = make_task_spec("pick_place", settings)
        for config_id in range(20):
            state = reset(spec, config_id)
            assert len(state.traps) == settings.max_traps
            _check_layout(state, spec)
        in_dist = make_task_spec("pick_place", EnvSettings(tasks=["pick_place"]))
        assert reset(spec, 0) != reset(in_dist, 0)

    @pytest.mark.slow
    @pytest.mark.parametrize("task", ["reach", "pick_place", "two_object_sequence"])
    def test_layout_invariants_sweep(self, env_settings, task):
        """Layout invariants hold over ten thousand configs."""
        spec = make_task_spec(task, env_settings)
        for config_id in range(10_000):
            _check_layout(reset(spec, config_id), spec)


class TestStep:
    """Test cases for step."""

    def test_zero_action(self, pick):
        """A zero action only advances the clock."""
        state = EnvState((0.5, 0.5), ((0.2, 0.2),), ((0.8, 0.8),), ())
        nxt, terminal, outcome = step(state, [0.0, 0.0, 0.0], pick)
        assert nxt.agent_pos == state.agent_pos and nxt.objects == state.objects
        assert nxt.step_count == 1
        assert not terminal and outcome == StepOutcome.RUNNING

    def test_displacement_clipped(self, pick):
        """Each axis moves at most max_step, and the agent stays in the arena."""
        state = EnvState((0.5, 0.99), ((0.2, 0.2),), ((0.8, 0.8),), ())
        nxt, _, _ = step(state, [1.0, 1.0, 0.0], pick)
        assert nxt.agent_pos == pytest.approx((0.55, 1.0))

    def test_grasp_and_carry(self, pick):
        """A closed grip near the object grasps it and the object follows the agent."""
        state = EnvState((0.21, 0.2), ((0.2, 0.2),), ((0.8, 0.8),), ())
        held, _, _ = step(state, [0.0, 0.0, 1.0], pick)
        assert held.holding
        moved, _, _ = step(held, [0.05, 0.0, 1.0], pick)
        assert moved.objects[0] == moved.agent_pos

    def test_grasp_out_of_reach(self, pick):
        """Closing the grip away from the object grasps nothing."""
        state = EnvState((0.4, 0.4), ((0.2, 0.2),), ((0.8, 0.8),), ())
        nxt, _, _ = step(state, [0.0, 0.0, 1.0], pick)
        assert not nxt.holding

    def test_release_at_goal_succeeds(self, pick):
        """Releasing the object within goal_radius completes pick-and-place."""
        state = EnvState((0.5, 0.5), ((0.5, 0.5),), ((0.52, 0.5),), (), holding=True)
        nxt, terminal, outcome = step(state, [0.0, 0.0, 0.0], pick)
        assert nxt.active == 1 and not nxt.holding
        assert terminal and outcome == StepOutcome.SUCCESS

    def test_release_elsewhere_drops_object(self, pick):
        """Releasing away from the goal leaves the object where it is."""
        state = EnvState((0.3, 0.5), ((0.3, 0.5),), ((0.8, 0.5),), (), holding=True)
        nxt, terminal, _ = step(state, [0.0, 0.0, 0.0], pick)
        assert nxt.active == 0 and not nxt.holding and not terminal

    def test_carry_into_trap_fails(self, pick):
        """Carrying the object into a trap ends the episode."""
        trap = Rect(0.22, 0.1, 0.4, 0.3)
        state = EnvState((0.2, 0.2), ((0.2, 0.2),), ((0.8, 0.8),), (trap,), holding=True)
        nxt, terminal, outcome = step(state, [0.05, 0.0, 1.0], pick)
        assert terminal and outcome == StepOutcome.FAILURE
        assert nxt.outcome == StepOutcome.FAILURE

    def test_release_inside_trap_fails(self, pick):
        """Opening the gripper on the step that enters a trap still fails."""
        trap = Rect(0.22, 0.1, 0.4, 0.3)
        state = EnvState((0.2, 0.2), ((0.2, 0.2),), ((0.8, 0.8),), (trap,), holding=True)
        nxt, terminal, outcome = step(state, [0.05, 0.0, 0.0], pick)
        assert not nxt.holding
        assert trap.contains(nxt.objects[0])
        assert terminal and outcome == StepOutcome.FAILURE

    def test_empty_handed_trap_is_safe(self, pick):
        """Crossing a trap without the object is allowed."""
        trap = Rect(0.22, 0.1, 0.4, 0.3)
        state = EnvState((0.2, 0.2), ((0.6, 0.6),), ((0.8, 0.8),), (trap,))
        _, terminal, _ = step(state, [0.05, 0.0, 0.0], pick)
        assert not terminal

    def test_reach_trap_fails(self, reach):
        """Reach fails on any trap entry."""
        trap = Rect(0.22, 0.1, 0.4, 0.3)
        state = EnvState((0.2, 0.2), (), ((0.8, 0.8),), (trap,))
        _, terminal, outcome = step(state, [0.05, 0.0, 0.0], reach)
        assert terminal and outcome == StepOutcome.FAILURE

    def test_reach_success(self, reach):
        """Reach succeeds inside goal_radius."""
        state = EnvState((0.75, 0.8), (), ((0.8, 0.8),), ())
        _, terminal, outcome = step(state, [0.05, 0.0, 0.0], reach)
        assert terminal and outcome == StepOutcome.SUCCESS

    def test_horizon_timeout(self, pick):
        """Reaching the horizon without success is a failure."""
        state = EnvState((0.5, 0.5), ((0.2, 0.2),), ((0.8, 0.8),), (), step_count=pick.horizon_limit - 1)
        _, terminal, outcome = step(state, [0.0, 0.0, 0.0], pick)
        assert terminal and outcome == StepOutcome.FAILURE

    def test_terminal_absorbs(self, pick):
        """Stepping a terminal state returns it unchanged."""
        state = EnvState((0.5, 0.5), ((0.2, 0.2),), ((0.8, 0.8),), (), outcome=StepOutcome.FAILURE)
        nxt, terminal, outcome = step(state, [0.05, 0.05, 1.0], pick)
        assert nxt is state and terminal and outcome == StepOutcome.FAILURE

    def test_action_shape(self, pick):
        """Actions must have three channels."""
        state = reset(pick, 0)
        with pytest.raises(ShapeError):
            step(state, [0.0, 0.0], pick)

    def test_state_validation(self):
        """States reject out-of-arena positions and holding without an object."""
        with pytest.raises(ContractError):
            EnvState((1.5, 0.5), (), ((0.8, 0.8),), ())
        with pytest.raises(ContractError):
            EnvState((0.5, 0.5), (), ((0.8, 0.8),), (), holding=True)


class TestObserve:
    """Test cases for observe."""

    def test_layout(self, env_settings):
        """Observations place agent, flags, objects, goals and traps at fixed offsets."""
        spec = make_task_spec("two_object_sequence", env_settings)
        trap = Rect(0.4, 0.4, 0.5, 0.6)
        state = EnvState((0.1, 0.2), ((0.3, 0.3), (0.7, 0.2)), ((0.8, 0.8), (0.2, 0.9)), (trap,))
        obs = observe(state, spec)
        assert obs.shape == (24,)
        assert np.array_equal(obs[0:4], [0.1, 0.2, 0.0, 0.0])
        assert np.array_equal(obs[4:8], [0.3, 0.3, 0.7, 0.2])
        assert np.array_equal(obs[8:12], [0.8, 0.8, 0.2, 0.9])
        assert np.array_equal(obs[12:16], [0.4, 0.4, 0.5, 0.6])
        assert not np.any(obs[16:])

    def test_task_ids(self):
        """Task ids are the configured names."""
        assert TaskId("two_object_sequence") == TaskId.TWO_OBJECT_SEQUENCE
