"""Tests for run configuration loading and settings."""

from pathlib import Path

import pytest
import yaml

from dagfil.core.config import RunConfig, Settings, get_settings, load_run_config, parse_run_config
from dagfil.core.errors import ConfigError
from dagfil.guidance.spec import GuidanceKind


class TestLoadRunConfig:
    """Test cases for load_run_config."""

    def test_defaults(self, tmp_path):
        """An empty file gives the default experiment."""
        path = tmp_path / "c.yaml"
        path.write_text("")
        config = load_run_config(path)
        assert config.seeds == [0, 1, 2]
        assert config.evaluation.n_configs == 50 and config.evaluation.n_runs == 3
        assert config.alpha_sweep == [0.5, 1.0, 2.0, 5.0]
        assert [arm.name for arm in config.arms] == ["success_only", "success_correction", "static_fil", "adaptive_fil"]
        assert config.arms[3].guidance.kind == GuidanceKind.ADAPTIVE_FI

    def test_nested_values(self, tmp_path):
        """Nested sections are validated into their models."""
        path = tmp_path / "c.yaml"
        path.write_text(yaml.safe_dump({"model": {"mode": "flow", "horizon": 4}, "flow": {"n_euler_steps": 5}}))
        config = load_run_config(path)
        assert config.model.mode == "flow" and config.model.horizon == 4
        assert config.flow.n_euler_steps == 5

    def test_missing_file(self, tmp_path):
        """A missing file is a configuration error."""
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "nope.yaml")

    def test_malformed_yaml(self, tmp_path):
        """YAML syntax errors name their position."""
        path = tmp_path / "c.yaml"
        path.write_text("model: [unclosed\n")
        with pytest.raises(ConfigError) as exc:
            load_run_config(path)
        assert "line" in str(exc.value)

    def test_not_a_mapping(self, tmp_path):
        """The document must be a mapping."""
        path = tmp_path / "c.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            load_run_config(path)

    @pytest.mark.parametrize(
        "data,fragment",
        [
            ({"seeds": []}, "seeds"),
            ({"model": {"horizon": 0}}, "model.horizon"),
            ({"model": {"step_embed_dim": 7}}, "model.step_embed_dim"),
            ({"env": {"tasks": ["stack"]}}, "env.tasks"),
            ({"optimizer": {"lr": -1.0}}, "optimizer.lr"),
            ({"arms": [{"name": "x", "checkpoint": "dag", "guidance": {"kind": "fi"}}]}, "guidance.kind"),
        ],
    )
    def test_schema_errors(self, data, fragment):
        """Schema violations are collected with their location."""
        with pytest.raises(ConfigError) as exc:
            parse_run_config(data)
        assert any(fragment in err for err in exc.value.errors)

    def test_consistency(self):
        """Cross-field rules are enforced."""
        with pytest.raises(ConfigError):
            parse_run_config({"train_config_offset": 10})
        with pytest.raises(ConfigError):
            parse_run_config({"model": {"task_dim": 1}, "env": {"tasks": ["reach", "pick_place"]}})
        arm = {"name": "a", "checkpoint": "dag"}
        with pytest.raises(ConfigError):
            parse_run_config({"arms": [arm, arm]})

    def test_hash_tracks_content(self):
        """Equal configs hash equally; any change alters the hash."""
        assert RunConfig().config_hash() == RunConfig().config_hash()
        assert RunConfig().config_hash() != parse_run_config({"seeds": [0]}).config_hash()


class TestSettings:
    """Test cases for process settings."""

    def test_environment(self, monkeypatch, tmp_path):
        """DAGFIL_* variables override the defaults."""
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("DAGFIL_OUTPUT_ROOT", str(tmp_path / "out"))
        monkeypatch.setenv("DAGFIL_WORKERS", "4")
        settings = get_settings()
        assert settings.output_root == tmp_path / "out"
        assert settings.workers == 4

    def test_output_dir(self, tmp_path):
        """Runs write under the output root unless a directory is configured."""
        settings = Settings(output_root=tmp_path)
        assert RunConfig(name="x").resolve_output_dir(settings) == tmp_path / "x"
        assert RunConfig(output_dir=Path("/elsewhere")).resolve_output_dir(settings) == Path("/elsewhere")


class TestShippedConfigs:
    """The configs directory holds valid run configurations."""

    @pytest.mark.parametrize("name", ["toy.yaml", "smoke.yaml", "trend.yaml"])
    def test_loads(self, name):
        """Each shipped config validates."""
        path = Path(__file__).resolve().parents[2] / "configs" / name
        config = load_run_config(path)
        assert config.name == name.removesuffix(".yaml")
