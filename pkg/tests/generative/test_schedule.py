"""Tests for noise schedules, flow grids and forward noising."""

import numpy as np
import pytest

from dagfil.core.config import DiffusionSettings, FlowSettings
from dagfil.core.errors import ContractError, ShapeError
from dagfil.generative.schedule import (
    FlowConfig,
    NoiseSchedule,
    process_from_dict,
    process_mode,
    q_sample,
)


class TestNoiseSchedule:
    """Test cases for NoiseSchedule."""

    def test_linear_defaults(self):
        """The default schedule has 50 linear betas from 1e-4 to 0.02."""
        sched = NoiseSchedule.from_settings(DiffusionSettings())
        assert sched.n_steps == 50
        assert sched.betas[0] == pytest.approx(1e-4)
        assert sched.betas[-1] == pytest.approx(0.02)
        assert np.all(np.diff(sched.alpha_bars) < 0)

    def test_rejects_invalid_betas(self):
        """Betas must lie strictly inside (0, 1)."""
        with pytest.raises(ContractError):
            NoiseSchedule(betas=np.array([0.0, 0.1]))
        with pytest.raises(ContractError):
            NoiseSchedule(betas=np.array([]))

    def test_posterior_variance_zero_at_first_step(self):
        """No noise is added on the last reverse step."""
        assert NoiseSchedule.linear(10).posterior_variance(0) == 0.0

    def test_dict_round_trip(self):
        """A schedule rebuilt from its header entry has the same betas."""
        sched = NoiseSchedule.linear(20, 1e-3, 0.05)
        rebuilt = process_from_dict(sched.to_dict())
        assert np.allclose(rebuilt.betas, sched.betas)
        assert process_mode(rebuilt) == "diffusion"


class TestFlowConfig:
    """Test cases for FlowConfig."""

    def test_uniform_grid(self):
        """Uniform grids span [0, 1]."""
        cfg = FlowConfig.from_settings(FlowSettings(n_euler_steps=4))
        assert np.allclose(cfg.t_grid, [0.0, 0.25, 0.5, 0.75, 1.0])
        assert cfg.n_euler_steps == 4
        assert process_mode(cfg) == "flow"

    def test_rejects_bad_grid(self):
        """Grids must increase strictly from 0 to 1."""
        with pytest.raises(ContractError):
            FlowConfig(t_grid=np.array([0.0, 0.5, 0.5, 1.0]))
        with pytest.raises(ContractError):
            FlowConfig(t_grid=np.array([0.1, 1.0]))

    def test_dict_round_trip(self):
        """A grid rebuilt from its header entry is identical."""
        cfg = FlowConfig(t_grid=np.array([0.0, 0.1, 0.6, 1.0]))
        assert np.array_equal(process_from_dict(cfg.to_dict()).t_grid, cfg.t_grid)
        assert process_from_dict({}) is None


class TestQSample:
    """Test cases for q_sample."""

    def test_closed_form(self):
        """ᾱ = 0.25 mixes [1, 0] and [0, 1] into [0.5, √0.75]."""
        sched = NoiseSchedule(betas=np.array([0.75]))
        out = q_sample(np.array([1.0, 0.0]), 0, np.array([0.0, 1.0]), sched)
        assert np.allclose(out.data, [0.5, np.sqrt(0.75)], atol=1e-12)

    def test_no_noise_limit(self):
        """ᾱ near one leaves the action."""
        sched = NoiseSchedule(betas=np.array([1e-12]))
        out = q_sample(np.array([0.3, -0.2]), 0, np.array([5.0, 5.0]), sched)
        assert np.allclose(out.data, [0.3, -0.2], atol=1e-5)

    def test_all_noise_limit(self):
        """ᾱ near zero returns the noise."""
        sched = NoiseSchedule(betas=np.full(40, 0.999))
        out = q_sample(np.array([0.3, -0.2]), 39, np.array([1.0, 2.0]), sched)
        assert np.allclose(out.data, [1.0, 2.0], atol=1e-6)

    def test_step_out_of_range(self):
        """Steps outside [0, n_steps) are rejected."""
        sched = NoiseSchedule.linear(5)
        with pytest.raises(ContractError):
            q_sample(np.zeros(2), 5, np.zeros(2), sched)
        with pytest.raises(ContractError):
            q_sample(np.zeros(2), -1, np.zeros(2), sched)

    def test_per_row_steps(self):
        """A step vector noises each row at its own level."""
        sched = NoiseSchedule.linear(10)
        a0 = np.ones((2, 3))
        noise = np.zeros((2, 3))
        out = q_sample(a0, np.array([0, 9]), noise, sched).data
        assert np.allclose(out[0], np.sqrt(sched.alpha_bars[0]))
        assert np.allclose(out[1], np.sqrt(sched.alpha_bars[9]))

    def test_shape_mismatch(self):
        """Action and noise shapes must agree."""
        with pytest.raises(ShapeError):
            q_sample(np.zeros(2), 0, np.zeros(3), NoiseSchedule.linear(5))
