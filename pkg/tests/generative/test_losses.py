"""Tests for the diffusion and flow-matching objectives."""

import numpy as np
import pytest

from dagfil.core.config import ModelSettings
from dagfil.core.errors import ContractError
from dagfil.data.chunks import ChunkBatch
from dagfil.generative.losses import diffusion_loss, flow_loss
from dagfil.generative.schedule import FLOW_TIME_SCALE, FlowConfig, NoiseSchedule, q_sample
from dagfil.models.dag import DagModel
from dagfil.numerics import Adam, Tensor, backward


def _batch(n: int, width: int = 6, seed: int = 0) -> ChunkBatch:
    rng = np.random.default_rng(seed)
    task = np.zeros((n, 2))
    task[:, 0] = 1.0
    return ChunkBatch(rng.uniform(-1, 1, size=(n, 3)), task, rng.uniform(-1, 1, size=(n, width)))


def _zero_head(noisy, obs, task, steps):
    return Tensor(np.zeros(noisy.shape))


class TestDiffusionLoss:
    """Test cases for diffusion_loss."""

    def test_oracle_head_gives_zero(self):
        """A head that returns the true noise has zero loss."""
        batch = _batch(16)
        sched = NoiseSchedule.linear(50)
        rng = np.random.default_rng(1)
        steps = rng.integers(0, 50, size=16)
        noise = rng.standard_normal(batch.actions.shape)
        loss = diffusion_loss(batch, lambda *args: Tensor(noise), sched, rng, steps=steps, noise=noise)
        assert loss.item() == 0.0

    def test_head_sees_noised_actions(self):
        """The head receives q_sample output and the integer steps."""
        batch = _batch(4)
        sched = NoiseSchedule.linear(10)
        steps = np.array([0, 3, 6, 9])
        noise = np.ones(batch.actions.shape)
        seen = {}

        def head(noisy, obs, task, step_values):
            seen["noisy"], seen["steps"] = noisy.data, step_values
            return Tensor(np.zeros(noisy.shape))

        diffusion_loss(batch, head, sched, np.random.default_rng(0), steps=steps, noise=noise)
        assert np.array_equal(seen["noisy"], q_sample(batch.actions, steps, noise, sched).data)
        assert np.array_equal(seen["steps"], steps.astype(float))

    def test_zero_head_matches_noise_energy(self):
        """A zero head scores E‖ε‖² = d×H within 5% over 10k rows."""
        batch = _batch(10_000, width=6)
        loss = diffusion_loss(batch, _zero_head, NoiseSchedule.linear(50), np.random.default_rng(2))
        assert loss.item() == pytest.approx(6.0, rel=0.05)

    def test_empty_batch(self):
        """An empty batch is a precondition violation."""
        empty = ChunkBatch(np.zeros((0, 3)), np.zeros((0, 2)), np.zeros((0, 6)))
        with pytest.raises(ContractError):
            diffusion_loss(empty, _zero_head, NoiseSchedule.linear(5), np.random.default_rng(0))

    def test_cond_dropout_zeroes_tasks(self):
        """Full dropout hands the head an all-zero task block."""
        seen = {}

        def head(noisy, obs, task, steps):
            seen["task"] = task
            return Tensor(np.zeros(noisy.shape))

        diffusion_loss(_batch(8), head, NoiseSchedule.linear(5), np.random.default_rng(0), cond_dropout=1.0)
        assert not np.any(seen["task"])

    def test_loss_decreases_on_one_point(self):
        """With fixed step and noise, Adam lowers the loss on every one of 200 steps."""
        settings = ModelSettings(task_dim=2, action_dim=3, horizon=2, hidden_dim=32, step_embed_dim=8)
        model = DagModel(settings, obs_dim=3, seed=0)
        batch = _batch(1)
        sched = NoiseSchedule.linear(50)
        rng = np.random.default_rng(5)
        steps, noise = np.array([20]), rng.standard_normal(batch.actions.shape)
        opt = Adam(model.parameters("trunk") + model.parameters("succ"), lr=1e-4)
        losses = []
        for _ in range(200):
            opt.zero_grad()
            loss = diffusion_loss(batch, model.head_fn("succ"), sched, rng, steps=steps, noise=noise)
            losses.append(loss.item())
            backward(loss)
            opt.step()
        assert all(b <= a for a, b in zip(losses, losses[1:]))
        assert losses[-1] < losses[0]


class TestFlowLoss:
    """Test cases for flow_loss."""

    def test_oracle_head_gives_zero(self):
        """A head returning a⁰ − ε has zero loss."""
        batch = _batch(16)
        rng = np.random.default_rng(1)
        noise = rng.standard_normal(batch.actions.shape)
        head = lambda *args: Tensor(batch.actions - noise)  # noqa: E731
        assert flow_loss(batch, head, FlowConfig.uniform(), rng, noise=noise).item() == 0.0

    def test_zero_head_matches_direct_computation(self):
        """A zero head scores the batch mean of ‖a⁰ − ε‖²."""
        batch = _batch(32)
        rng = np.random.default_rng(3)
        noise = rng.standard_normal(batch.actions.shape)
        expected = np.mean(np.sum((batch.actions - noise) ** 2, axis=1))
        loss = flow_loss(batch, _zero_head, FlowConfig.uniform(), rng, noise=noise)
        assert loss.item() == pytest.approx(expected, rel=1e-12)

    def test_time_scaling(self):
        """The head sees t scaled for the step embedding and the linear interpolant."""
        batch = _batch(2)
        times = np.array([0.25, 0.5])
        noise = np.zeros(batch.actions.shape)
        seen = {}

        def head(noisy, obs, task, steps):
            seen["noisy"], seen["steps"] = noisy.data, steps
            return Tensor(np.zeros(noisy.shape))

        flow_loss(batch, head, FlowConfig.uniform(), np.random.default_rng(0), times=times, noise=noise)
        assert np.allclose(seen["steps"], times * FLOW_TIME_SCALE)
        assert np.allclose(seen["noisy"], times.reshape(-1, 1) * batch.actions)

    def test_empty_batch(self):
        """An empty batch is a precondition violation."""
        empty = ChunkBatch(np.zeros((0, 3)), np.zeros((0, 2)), np.zeros((0, 6)))
        with pytest.raises(ContractError):
            flow_loss(empty, _zero_head, FlowConfig.uniform(), np.random.default_rng(0))
