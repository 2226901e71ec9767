"""Operator-related Pydantic models."""

from enum import Enum

from pydantic import BaseModel, ConfigDict, model_validator

from src.models.arrays import FloatArrayField
from src.models.params import JacobiParams


class HistoBasis(str, Enum):
    """Polynomial basis of the histopolant.

    SHIFTED uses phi_{j-1} = P^{(alpha+1, beta+1)}_{j-1}, the basis of the
    factorization identities; STANDARD uses P^{(alpha, beta)}_{j-1}, the basis
    of the stability estimates.
    """

    SHIFTED = "shifted"
    STANDARD = "standard"

    def polynomial_params(self, params: JacobiParams) -> JacobiParams:
        """Jacobi parameters of the basis polynomials."""
        return params.shifted() if self is HistoBasis.SHIFTED else params


class OperatorBundle(BaseModel):
    """All matrices of the factorization H = Delta Psi and Psi = R + Iext TJ."""

    model_config = ConfigDict(frozen=True)

    params: JacobiParams
    H: FloatArrayField  # noqa: N815
    Delta: FloatArrayField  # noqa: N815
    Psi: FloatArrayField  # noqa: N815
    R: FloatArrayField  # noqa: N815
    Iext: FloatArrayField  # noqa: N815
    TJ: FloatArrayField  # noqa: N815

    @model_validator(mode="after")
    def check_dimensions(self) -> "OperatorBundle":
        """Validate the dimensional compatibility of the factors."""
        n = self.H.shape[0]
        expected = {
            "H": (n, n),
            "Delta": (n, n + 1),
            "Psi": (n + 1, n),
            "R": (n + 1, n),
            "Iext": (n + 1, n + 2),
            "TJ": (n + 2, n),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        return self

    @property
    def n(self) -> int:
        return int(self.H.shape[0])


class FactorizationReport(BaseModel):
    """Relative Frobenius residuals of the two exact factorizations."""

    model_config = ConfigDict(frozen=True)

    n: int
    r1: float  # ||H - Delta Psi||_F / ||H||_F
    r2: float  # ||Psi - R - Iext TJ||_F / ||Psi||_F


class LemmaReport(BaseModel):
    """Pointwise residuals of the primitive identities at sample points."""

    model_config = ConfigDict(frozen=True)

    j_max: int
    n_samples: int
    integration_by_parts_max: float
    tridiagonal_locality_max: float
