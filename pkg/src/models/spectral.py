"""Spectral experiment Pydantic models."""

import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.models.arrays import FloatArrayField

ScalingKind = Literal[
    "none",
    "divide_by_N_pow",
    "divide_by_logN_pow",
    "premultiply_sqrt_Dh_then_N_pow",
]


class ScalingSpec(BaseModel):
    """Normalization applied to a matrix before counting singular values."""

    model_config = ConfigDict(frozen=True)

    kind: ScalingKind = "none"
    gamma: float = 0.0

    @field_validator("gamma")
    @classmethod
    def gamma_finite(cls, v: float) -> float:
        """Validate that gamma is finite."""
        if not math.isfinite(v):
            raise ValueError("gamma must be finite")
        return v

    @property
    def is_scalar(self) -> bool:
        """True when the scaling multiplies the matrix by a scalar."""
        return self.kind != "premultiply_sqrt_Dh_then_N_pow"

    @property
    def label(self) -> str:
        if self.kind == "none":
            return "A"
        if self.kind == "divide_by_N_pow":
            return f"A/N^{self.gamma:g}"
        if self.kind == "divide_by_logN_pow":
            return f"A/(logN)^{self.gamma:g}"
        return f"N^{self.gamma:g}*Dh^(1/2)*A"


class SymbolSamples(BaseModel):
    """Sorted samples of |symbol| on an m x m midpoint grid over [0,1] x [-pi,pi]."""

    model_config = ConfigDict(frozen=True)

    values: FloatArrayField
    grid_m: int = Field(ge=2)
    trim: tuple[float, float] = (0.05, 0.95)

    @field_validator("trim")
    @classmethod
    def trim_window(cls, v: tuple[float, float]) -> tuple[float, float]:
        """Validate 0 <= lo < hi <= 1."""
        lo, hi = v
        if not 0.0 <= lo < hi <= 1.0:
            raise ValueError("trim window must satisfy 0 <= lo < hi <= 1")
        return v

    @model_validator(mode="after")
    def check_rearrangement(self) -> "SymbolSamples":
        """Validate length and the nonincreasing order."""
        if self.values.shape != (self.grid_m * self.grid_m,):
            raise ValueError("symbol samples must have length grid_m**2")
        if np.any(self.values < 0.0) or np.any(np.diff(self.values) > 0.0):
            raise ValueError("symbol samples must be nonnegative and nonincreasing")
        return self


class RearrangementComparison(BaseModel):
    """Deviation of sorted singular values from the rearranged symbol."""

    model_config = ConfigDict(frozen=True)

    quantiles: FloatArrayField
    sigma_values: FloatArrayField
    symbol_values: FloatArrayField
    window: tuple[float, float]
    max_relative_deviation: float
    mean_relative_deviation: float


class DecayRecord(BaseModel):
    """One threshold fraction q_N(eps) of a scaled matrix."""

    model_config = ConfigDict(frozen=True)

    N: int = Field(ge=1)  # noqa: N815
    scaling: str
    gamma: float
    eps: float = Field(gt=0.0)
    q: float = Field(ge=0.0)


class ZeroDistributionReport(BaseModel):
    """Threshold fractions over an N-list and the per-threshold decay verdicts."""

    model_config = ConfigDict(frozen=True)

    family: str
    scaling: ScalingSpec
    records: list[DecayRecord] = Field(default_factory=list)
    # None when fewer than two sizes were probed
    decay_flags: dict[float, Optional[bool]] = Field(default_factory=dict)

    def q_series(self, eps: float) -> list[float]:
        """q_N(eps) ordered by N."""
        rows = sorted((r for r in self.records if r.eps == eps), key=lambda r: r.N)
        return [r.q for r in rows]

    @property
    def all_decaying(self) -> bool:
        return all(flag is not False for flag in self.decay_flags.values())
