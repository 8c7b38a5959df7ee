"""
Guidance Spec: Which score combiner to apply during sampling, and its scales.
"""

from enum import Enum

from pydantic import BaseModel, Field


class GuidanceKind(str, Enum):
    """Supported score/velocity combiners."""
    NONE = "none"
    CFG = "cfg"
    NP = "np"
    STATIC_FI = "static_fi"
    ADAPTIVE_FI = "adaptive_fi"


class GuidanceSpec(BaseModel):
    """
    Guidance configuration.

    Only the scales demanded by ``kind`` are read: ``lam`` for cfg, np and
    static_fi, ``alpha`` and ``cos_floor`` for adaptive_fi.
    """

    model_config = {"frozen": True}

    kind: GuidanceKind = GuidanceKind.NONE
    lam: float = Field(0.0, ge=0.0, allow_inf_nan=False, description="Static guidance scale")
    alpha: float = Field(0.0, ge=0.0, allow_inf_nan=False, description="Adaptive guidance scale")
    cos_floor: float = Field(1e-8, ge=0.0, allow_inf_nan=False, description="Norm floor for cosine")

    @property
    def uses_failure_head(self) -> bool:
        """True for the failure-informed kinds."""
        return self.kind in (GuidanceKind.STATIC_FI, GuidanceKind.ADAPTIVE_FI)

    @property
    def uses_null_condition(self) -> bool:
        """True for kinds that need an unconditional branch."""
        return self.kind in (GuidanceKind.CFG, GuidanceKind.NP)

    def label(self) -> str:
        """Short human-readable label, e.g. ``adaptive_fi(alpha=1.0)``."""
        if self.kind in (GuidanceKind.CFG, GuidanceKind.NP, GuidanceKind.STATIC_FI):
            return f"{self.kind.value}(lam={self.lam:g})"
        if self.kind == GuidanceKind.ADAPTIVE_FI:
            return f"{self.kind.value}(alpha={self.alpha:g})"
        return self.kind.value
