"""Histopolant Pydantic model."""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from src.models.arrays import FloatArrayField
from src.models.operators import HistoBasis
from src.models.params import JacobiParams


class Histopolant(BaseModel):
    """Polynomial p_{N-1} = sum_j c_j phi_{j-1} in a chosen Jacobi basis."""

    model_config = ConfigDict(frozen=True)

    coeffs: FloatArrayField
    basis: HistoBasis
    params: JacobiParams
    residual: Optional[float] = Field(default=None, ge=0.0)  # ||H c - b|| / ||b||
    condition: Optional[float] = None  # 1-norm condition estimate of H

    @property
    def degree(self) -> int:
        return int(self.coeffs.shape[0]) - 1
