"""Tests for success-only and dual-head training."""

import numpy as np
import pytest

from dagfil.core.config import ModelSettings, OptimizerSettings
from dagfil.core.errors import ContractError, TrainingDivergedError
from dagfil.data.chunks import ChunkBatch
from dagfil.generative.schedule import FlowConfig, NoiseSchedule
from dagfil.models.checkpoint import load_checkpoint
from dagfil.models.dag import DagModel
from dagfil.training.trainer import train_dag, train_success_only


def _model(mode: str = "diffusion", seed: int = 0) -> DagModel:
    settings = ModelSettings(task_dim=1, action_dim=2, horizon=2, hidden_dim=32, step_embed_dim=8, mode=mode)
    return DagModel(settings, obs_dim=2, seed=seed)


def _batch(center, n: int = 256, seed: int = 0) -> ChunkBatch:
    rng = np.random.default_rng(seed)
    actions = np.tile(np.asarray(center, dtype=float), (n, 2)) + rng.normal(0.0, 0.05, size=(n, 4))
    return ChunkBatch(rng.uniform(-1, 1, size=(n, 2)), np.ones((n, 1)), actions)


def _window_means(curve, width: int = 50):
    values = [loss for _, loss in curve]
    return float(np.mean(values[:width])), float(np.mean(values[-width:]))


@pytest.fixture
def opt() -> OptimizerSettings:
    return OptimizerSettings(lr=1e-3, batch_size=64, log_every=50, checkpoint_every=50)


class TestTrainSuccessOnly:
    """Test cases for train_success_only."""

    def test_failure_head_untouched(self, opt):
        """Success-only training never moves the failure head."""
        model = _model()
        before = model.digest("fail")
        train_success_only(_batch([0.5, -0.5]), model, NoiseSchedule.linear(20), opt, steps=20)
        assert model.digest("fail") == before
        assert model.trained_heads == {"succ"}

    @pytest.mark.parametrize("mode,process", [("diffusion", NoiseSchedule.linear(20)), ("flow", FlowConfig.uniform(5))])
    def test_loss_decreases(self, opt, mode, process):
        """The late loss window sits below the early one."""
        history = train_success_only(_batch([0.5, -0.5]), _model(mode), process, opt, steps=300)
        early, late = _window_means(history.losses["succ"])
        assert late < early
        assert len(history.losses["succ"]) == 300
        assert history.losses["fail"] == []

    def test_deterministic(self, opt, tmp_path):
        """Same seed and data give the same trained parameters."""
        digests = []
        for name in ("a", "b"):
            model = _model()
            path = tmp_path / f"{name}.npz"
            history = train_success_only(
                _batch([0.2, 0.1]), model, NoiseSchedule.linear(10), opt, steps=60, seed=4, checkpoint_path=path
            )
            assert history.checkpoints == [path]
            digests.append(load_checkpoint(path).digest())
            assert digests[-1] == model.digest()
        assert digests[0] == digests[1]

    def test_mode_mismatch(self, opt):
        """The process must match the model mode."""
        with pytest.raises(ContractError):
            train_success_only(_batch([0.0, 0.0]), _model("flow"), NoiseSchedule.linear(5), opt, steps=1)

    def test_empty_split(self, opt):
        """An empty success split is rejected."""
        empty = ChunkBatch(np.zeros((0, 2)), np.zeros((0, 1)), np.zeros((0, 4)))
        with pytest.raises(ContractError):
            train_success_only(empty, _model(), NoiseSchedule.linear(5), opt, steps=1)

    def test_divergence_reports_last_checkpoint(self, tmp_path):
        """A non-finite loss stops training and points at the last good checkpoint."""
        opt = OptimizerSettings(lr=1e200, batch_size=16, log_every=1, checkpoint_every=1)
        model, path, data = _model(), tmp_path / "m.npz", _batch([0.5, 0.5])
        with np.errstate(all="ignore"):
            with pytest.raises(TrainingDivergedError) as exc:
                train_success_only(data, model, NoiseSchedule.linear(5), opt, steps=50, checkpoint_path=path)
        assert exc.value.step > 1
        assert exc.value.checkpoint_path == path
        assert load_checkpoint(exc.value.checkpoint_path).trained_heads == {"succ"}


class TestTrainDag:
    """Test cases for train_dag."""

    def test_both_heads_learn(self, opt):
        """Joint training lowers both losses and marks both heads trained."""
        model = _model()
        history = train_dag(
            _batch([0.5, -0.5]), _batch([-0.5, 0.5], seed=1), model, NoiseSchedule.linear(20), opt, steps=300
        )
        for head in ("succ", "fail"):
            early, late = _window_means(history.losses[head])
            assert late < early
        assert model.trained_heads == {"succ", "fail"}

    def test_freeze_trunk(self, opt):
        """With a frozen trunk only the heads move."""
        model = _model("flow")
        trunk, succ = model.digest("trunk"), model.digest("succ")
        success, failure = _batch([0.5, 0.0]), _batch([0.0, 0.5])
        train_dag(success, failure, model, FlowConfig.uniform(4), opt, steps=10, freeze_trunk=True)
        assert model.digest("trunk") == trunk
        assert model.digest("succ") != succ

    def test_empty_failure_split(self, opt):
        """Both splits are required."""
        empty = ChunkBatch(np.zeros((0, 2)), np.zeros((0, 1)), np.zeros((0, 4)))
        with pytest.raises(ContractError):
            train_dag(_batch([0.0, 0.0]), empty, _model(), NoiseSchedule.linear(5), opt, steps=1)

    @pytest.mark.slow
    def test_identical_supervision_keeps_heads_close(self):
        """Tied heads trained on the same data stay close in prediction."""
        model = _model(seed=2)
        data = _batch([0.4, -0.3], n=512, seed=2)
        opt = OptimizerSettings(lr=5e-4, batch_size=128, log_every=500, checkpoint_every=500)
        train_dag(data, data, model, NoiseSchedule.linear(20), opt, steps=1500, seed=2)

        rng = np.random.default_rng(9)
        noisy, obs = rng.standard_normal((256, 4)), rng.uniform(-1, 1, size=(256, 2))
        steps = rng.integers(0, 20, size=256).astype(float)
        s, f = model.predict_pair(noisy, obs, np.ones((256, 1)), steps)
        assert float(np.mean(np.abs(s.data - f.data))) < 0.1
