"""Jacobi parameter and coefficient models."""

import math

from pydantic import BaseModel, ConfigDict, computed_field, field_validator


class JacobiParams(BaseModel):
    """The exponent pair (alpha, beta) of the Jacobi weight (1-t)^alpha (1+t)^beta."""

    model_config = ConfigDict(frozen=True)

    alpha: float
    beta: float

    @field_validator("alpha", "beta")
    @classmethod
    def orthogonality_regime(cls, v: float) -> float:
        """Validate that the exponent is finite and greater than -1."""
        if not math.isfinite(v):
            raise ValueError("exponent must be finite")
        if v <= -1.0:
            raise ValueError("exponent must be greater than -1")
        return v

    @computed_field  # type: ignore[prop-decorator]
    @property
    def sigma(self) -> float:
        return self.alpha + self.beta

    @computed_field  # type: ignore[prop-decorator]
    @property
    def delta(self) -> float:
        return self.alpha - self.beta

    def shifted(self, shift: float = 1.0) -> "JacobiParams":
        """Parameters (alpha + shift, beta + shift), e.g. the derivative family."""
        return JacobiParams(alpha=self.alpha + shift, beta=self.beta + shift)

    @property
    def exponents(self) -> tuple[float, float]:
        return (self.alpha, self.beta)

    def __str__(self) -> str:
        return f"(alpha={self.alpha:g}, beta={self.beta:g})"


class RecurrenceCoeffs(BaseModel):
    """Coefficients of t P_j = a P_{j+1} + b P_j + c P_{j-1}."""

    model_config = ConfigDict(frozen=True)

    j: int
    a: float
    b: float
    c: float


class CouplingCoeffs(BaseModel):
    """Coefficients (u, d, l) coupling the primitives I_{j+1}, I_j, I_{j-1}."""

    model_config = ConfigDict(frozen=True)

    j: int
    u: float
    d: float
    l: float  # noqa: E741
