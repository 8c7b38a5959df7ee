"""Tests for checkpoint persistence."""

import numpy as np
import pytest

from dagfil.core.errors import ParseError
from dagfil.models.checkpoint import load_checkpoint, read_header, save_checkpoint
from dagfil.models.dag import DagModel

from tests.conftest import randomize_heads, unit_stats


class TestCheckpoint:
    """Test cases for save_checkpoint / load_checkpoint."""

    def test_round_trip_is_bit_exact(self, small_model_settings, tmp_path):
        """Parameters, statistics and trained heads survive a round trip."""
        model = randomize_heads(DagModel(small_model_settings, obs_dim=6, seed=4), seed=1)
        model.stats = unit_stats(6)
        path = save_checkpoint(model, tmp_path / "m.npz", {"kind": "flow", "n_euler_steps": 2, "t_grid": [0, 0.5, 1]})

        loaded = load_checkpoint(path)
        assert loaded.digest() == model.digest()
        assert loaded.trained_heads == {"succ", "fail"}
        assert loaded.process["kind"] == "flow"
        assert np.array_equal(loaded.stats.action_max, model.stats.action_max)
        assert loaded.settings == model.settings

    def test_header(self, small_model_settings, tmp_path):
        """The header records mode and observation width."""
        path = save_checkpoint(DagModel(small_model_settings, obs_dim=6), tmp_path / "m.npz")
        header = read_header(path)
        assert header["mode"] == "diffusion"
        assert header["obs_dim"] == 6

    def test_missing_file(self, tmp_path):
        """Loading a missing file raises ParseError."""
        with pytest.raises(ParseError):
            load_checkpoint(tmp_path / "absent.npz")

    def test_foreign_archive(self, tmp_path):
        """An npz without a header is rejected."""
        path = tmp_path / "other.npz"
        np.savez(path, weights=np.zeros(3))
        with pytest.raises(ParseError):
            load_checkpoint(path)
