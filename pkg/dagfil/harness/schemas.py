"""
Schemas: Result rows and the pipeline report.
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, Field


class EpisodeResult(BaseModel):
    """One evaluated episode."""

    task: str
    arm: str
    config_id: int
    run: int
    seed: int = Field(..., description="Training seed the evaluated model came from")
    outcome: Literal["success", "failure"]
    steps: int = Field(..., ge=0)
    mean_lambda: float = Field(0.0, description="Mean adaptive/static scale over guided sampler steps")
    numeric_fault: bool = False


class SummaryRow(BaseModel):
    """Success rate of one arm on one task for one training seed."""

    task: str
    arm: str
    success_rate_pct: float = Field(..., ge=0.0, le=100.0)
    n_episodes: int = Field(..., gt=0)
    seed: int


class AggregateRow(BaseModel):
    """Success rate across training seeds."""

    task: str
    arm: str
    mean_success_rate_pct: float
    std_success_rate_pct: float
    n_seeds: int = Field(..., gt=0)


class PipelineReport(BaseModel):
    """Outcome of a full pipeline run; partial when a stage failed."""

    config_name: str
    config_hash: str
    stage_reached: str = "start"
    error: Optional[str] = None
    episodes: List[EpisodeResult] = Field(default_factory=list)
    summary: List[SummaryRow] = Field(default_factory=list)
    aggregate: List[AggregateRow] = Field(default_factory=list)
    output_dir: Optional[str] = None

    @property
    def complete(self) -> bool:
        return self.error is None and self.stage_reached == "done"
