"""
Configuration: Run configuration schema and process-level settings.

Run configurations are YAML documents validated into pydantic models.
Process-level settings (output root, log level, worker count) come from
``DAGFIL_*`` environment variables or a ``.env`` file.
"""

from typing import Any, Dict, List, Literal, Optional, Union
from pathlib import Path
import hashlib
import json
import logging

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .errors import ConfigError
from ..guidance.spec import GuidanceKind, GuidanceSpec

logger = logging.getLogger(__name__)

TaskName = Literal["reach", "pick_place", "two_object_sequence"]
GenerativeMode = Literal["diffusion", "flow"]


class Settings(BaseSettings):
    """Process-level settings read from the environment."""

    model_config = SettingsConfigDict(env_prefix="DAGFIL_", env_file=".env", extra="ignore")

    output_root: Path = Field(Path("runs"), description="Root directory for run artifacts")
    log_level: str = Field("INFO", description="Logging level name")
    workers: int = Field(1, ge=1, description="Worker threads for rollouts")


def get_settings() -> Settings:
    """Load settings, honouring a local .env file."""
    load_dotenv()
    return Settings()


class ModelSettings(BaseModel):
    """Dual action generator architecture."""

    task_dim: int = Field(3, gt=0, description="Width of the task one-hot")
    action_dim: int = Field(3, gt=0, description="Per-timestep action width d")
    horizon: int = Field(8, gt=0, description="Action chunk length H")
    hidden_dim: int = Field(256, gt=0)
    step_embed_dim: int = Field(32, gt=0, description="Sinusoidal step embedding width")
    mode: GenerativeMode = "diffusion"
    cond_dropout: float = Field(
        0.0, ge=0.0, lt=1.0, description="Probability of zeroing the task one-hot in success batches"
    )

    @field_validator("step_embed_dim")
    @classmethod
    def _even_embedding(cls, value: int) -> int:
        if value % 2:
            raise ValueError("step_embed_dim must be even")
        return value


class DiffusionSettings(BaseModel):
    """DDPM noise schedule."""

    n_steps: int = Field(50, gt=0)
    beta_start: float = Field(1e-4, gt=0.0, lt=1.0)
    beta_end: float = Field(0.02, gt=0.0, lt=1.0)
    schedule: Literal["linear"] = "linear"


class FlowSettings(BaseModel):
    """Flow-matching Euler integration grid."""

    n_euler_steps: int = Field(10, gt=0)


class EnvSettings(BaseModel):
    """Toy manipulation arena parameters."""

    tasks: List[TaskName] = Field(default_factory=lambda: ["pick_place", "two_object_sequence"])
    max_step: float = Field(0.05, gt=0.0)
    grasp_radius: float = Field(0.04, gt=0.0)
    goal_radius: float = Field(0.04, gt=0.0)
    horizon_short: int = Field(120, gt=0)
    horizon_long: int = Field(240, gt=0)
    max_traps: int = Field(3, gt=0)
    ood: bool = Field(False, description="Use the shifted clutter init family")

    @field_validator("tasks")
    @classmethod
    def _non_empty(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("at least one task is required")
        return value


class DatasetSizes(BaseModel):
    """Rollout budgets and optional caps per outcome label."""

    demo_configs: int = Field(200, gt=0, description="Expert demonstrations per task")
    failure_configs: int = Field(200, gt=0, description="Configs rolled out for failure collection")
    failure_runs: int = Field(1, gt=0)
    max_success: Optional[int] = Field(None, gt=0)
    max_corrected: Optional[int] = Field(None, gt=0)
    max_failure: Optional[int] = Field(None, gt=0)
    failure_chunks: Literal["full", "post_divergence"] = "full"
    bootstrap_noise: float = Field(0.04, ge=0.0, description="Noisy-expert action std")


class OptimizerSettings(BaseModel):
    """Adam and training-loop settings."""

    lr: float = Field(1e-3, gt=0.0)
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    eps: float = Field(1e-8, gt=0.0)
    batch_size: int = Field(128, gt=0)
    success_steps: int = Field(20000, gt=0)
    finetune_steps: int = Field(5000, gt=0)
    dag_steps: int = Field(20000, gt=0)
    log_every: int = Field(500, gt=0)
    checkpoint_every: int = Field(1000, gt=0)
    freeze_trunk: bool = False


class GuidanceArm(BaseModel):
    """A named evaluation arm: which checkpoint and which guidance."""

    name: str
    checkpoint: Literal["success_only", "success_correction", "dag"]
    guidance: GuidanceSpec = Field(default_factory=GuidanceSpec)


def default_arms() -> List[GuidanceArm]:
    """The four arms of the failure-informed ablation."""
    return [
        GuidanceArm(name="success_only", checkpoint="success_only"),
        GuidanceArm(name="success_correction", checkpoint="success_correction"),
        GuidanceArm(
            name="static_fil",
            checkpoint="dag",
            guidance=GuidanceSpec(kind=GuidanceKind.STATIC_FI, lam=0.05),
        ),
        GuidanceArm(
            name="adaptive_fil",
            checkpoint="dag",
            guidance=GuidanceSpec(kind=GuidanceKind.ADAPTIVE_FI, alpha=1.0),
        ),
    ]


class EvaluationSettings(BaseModel):
    """Paired evaluation protocol."""

    n_configs: int = Field(50, gt=0)
    n_runs: int = Field(3, gt=0)
    config_offset: int = Field(0, ge=0)
    ood_configs: int = Field(25, gt=0)
    clip: Optional[float] = Field(3.0, gt=0.0, description="Sampler clip in normalized units")


class RunConfig(BaseModel):
    """Top-level run configuration."""

    name: str = "dagfil-run"
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2])
    model: ModelSettings = Field(default_factory=ModelSettings)
    diffusion: DiffusionSettings = Field(default_factory=DiffusionSettings)
    flow: FlowSettings = Field(default_factory=FlowSettings)
    env: EnvSettings = Field(default_factory=EnvSettings)
    data: DatasetSizes = Field(default_factory=DatasetSizes)
    optimizer: OptimizerSettings = Field(default_factory=OptimizerSettings)
    evaluation: EvaluationSettings = Field(default_factory=EvaluationSettings)
    arms: List[GuidanceArm] = Field(default_factory=default_arms)
    alpha_sweep: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0, 5.0])
    train_config_offset: int = Field(10000, ge=0)
    output_dir: Optional[Path] = None

    @model_validator(mode="after")
    def _check_consistency(self) -> "RunConfig":
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        if len(self.env.tasks) > self.model.task_dim:
            raise ValueError(
                f"{len(self.env.tasks)} tasks do not fit task_dim={self.model.task_dim}"
            )
        if self.train_config_offset < self.evaluation.n_configs + self.evaluation.config_offset:
            raise ValueError("training config block overlaps the evaluation block")
        names = [arm.name for arm in self.arms]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate arm names: {names}")
        return self

    def config_hash(self) -> str:
        """Stable hash of the configuration content."""
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def resolve_output_dir(self, settings: Optional[Settings] = None) -> Path:
        """Directory where this run writes its artifacts."""
        if self.output_dir is not None:
            return self.output_dir
        settings = settings or get_settings()
        return settings.output_root / self.name


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """
    Load and validate a YAML run configuration.

    Args:
        path: Path to a YAML file

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: file missing, malformed YAML, or schema violations
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")

    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"Invalid YAML in {path}{where}: {e}")

    if not isinstance(data, dict):
        raise ConfigError(f"Config {path} must be a YAML mapping")

    return parse_run_config(data, source=str(path))


def parse_run_config(data: Dict[str, Any], source: str = "<dict>") -> RunConfig:
    """Validate a configuration mapping."""
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        errors = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        raise ConfigError(f"Invalid run config {source}", errors=errors)

    logger.debug(f"Loaded run config {config.name} from {source}")
    return config
