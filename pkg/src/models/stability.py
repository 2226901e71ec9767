"""Stability report Pydantic model."""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from src.utils.errors import ParameterError


class StabilityReport(BaseModel):
    """Outcome of the mesh-weighted stability checks at one size N."""

    model_config = ConfigDict(frozen=True)

    N: int = Field(ge=1)  # noqa: N815
    alpha: float
    beta: float
    lambda_max_gram: float
    trace_gram: float
    log_bound_ratio: float  # lambda_max / (1 + log N)
    trace_log_ratio: float  # trace / (1 + log N)
    op_norm_2_to_h: float
    inequality_margin: float  # min over trials of c^T G c - ||H c||_h^2
    psd_min_eigenvalue: Optional[float] = None  # min eig(G - H^T D_h H), moderate N only
    trials: int
    seed: int

    def holds(self, tol: float = 1e-8) -> bool:
        """True when every stability inequality holds up to `tol`."""
        ok = self.inequality_margin >= -tol
        ok = ok and self.op_norm_2_to_h <= self.lambda_max_gram**0.5 + tol
        if self.psd_min_eigenvalue is not None:
            ok = ok and self.psd_min_eigenvalue >= -tol
        return ok


class LogGrowthRecord(BaseModel):
    """Largest eigenvalue and trace of the leading N x N Gram block."""

    model_config = ConfigDict(frozen=True)

    N: int = Field(ge=1)  # noqa: N815
    lambda_max: float
    trace: float
    log_bound_ratio: float
    trace_log_ratio: float


# Size whose lambda_max / (1 + log N) fixes the reference constant of the log-growth check.
CALIBRATION_N = 16


def log_growth_bounded(
    records: list[LogGrowthRecord], slack: float = 1.5, calibration_n: int = CALIBRATION_N
) -> bool:
    """True when lambda_max / (1 + log N) stays within `slack` times its value at `calibration_n`.

    Only records with N >= calibration_n are checked.

    Raises:
        ParameterError: If records are given but none has N = calibration_n
    """
    if not records:
        return True
    reference = next((r.log_bound_ratio for r in records if r.N == calibration_n), None)
    if reference is None:
        raise ParameterError(
            f"log-growth calibration needs a record at N={calibration_n}, "
            f"got N in {sorted(r.N for r in records)}"
        )
    return all(r.log_bound_ratio <= slack * reference for r in records if r.N >= calibration_n)
