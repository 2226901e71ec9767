"""Jacobi polynomials, weights, norms and coefficient sequences.

All functions are pure. Polynomials follow the classical normalization
P_0 = 1, P_1(t) = (alpha+beta+2) t / 2 + (alpha-beta) / 2, and are evaluated by
upward three-term recurrence.
"""

import logging
import math

import numpy as np
from scipy.special import gammaln

from src.models.arrays import FloatArray
from src.models.params import CouplingCoeffs, JacobiParams, RecurrenceCoeffs
from src.utils.errors import (
    DomainError,
    EndpointSingularityError,
    IntegrabilityError,
    ParameterError,
)

logger = logging.getLogger(__name__)


def _check_point(t: float) -> None:
    if not -1.0 <= t <= 1.0:
        raise DomainError(t)


def weight_values(exponents: tuple[float, float], t: FloatArray) -> FloatArray:
    """(1-t)^a (1+t)^b at interior points, without validation."""
    a, b = exponents
    t = np.asarray(t, dtype=np.float64)
    out = np.ones_like(t)
    if a != 0.0:
        out = out * np.power(1.0 - t, a)
    if b != 0.0:
        out = out * np.power(1.0 + t, b)
    return out


def weight(params: JacobiParams, t: float) -> float:
    """Jacobi weight (1-t)^alpha (1+t)^beta at a point of [-1, 1].

    Raises:
        DomainError: If t lies outside [-1, 1]
        EndpointSingularityError: If t = 1 with alpha < 0, or t = -1 with beta < 0
    """
    _check_point(t)
    if t == 1.0 and params.alpha < 0.0:
        raise EndpointSingularityError(t, params.alpha)
    if t == -1.0 and params.beta < 0.0:
        raise EndpointSingularityError(t, params.beta)
    return float(weight_values(params.exponents, np.array(t)))


def recurrence_coeffs(params: JacobiParams, j: int) -> RecurrenceCoeffs:
    """Coefficients a_j, b_j, c_j of t P_j = a_j P_{j+1} + b_j P_j + c_j P_{j-1}."""
    if j < 1:
        raise ParameterError(f"recurrence coefficients need j >= 1, got {j}")
    a, b, c = recurrence_arrays(params, np.array([j]))
    return RecurrenceCoeffs(j=j, a=float(a[0]), b=float(b[0]), c=float(c[0]))


def recurrence_arrays(
    params: JacobiParams, j: FloatArray
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Vectorized a_j, b_j, c_j for an array of degrees j >= 1."""
    al, be, s = params.alpha, params.beta, params.sigma
    j = np.asarray(j, dtype=np.float64)
    a = 2.0 * (j + 1.0) * (j + s + 1.0) / ((2.0 * j + s + 1.0) * (2.0 * j + s + 2.0))
    # beta^2 - alpha^2 is exactly zero in the symmetric case
    b = (be * be - al * al) / ((2.0 * j + s) * (2.0 * j + s + 2.0))
    c = 2.0 * (j + al) * (j + be) / ((2.0 * j + s) * (2.0 * j + s + 1.0))
    return a, np.broadcast_to(b, j.shape).astype(np.float64), c


def coupling_coeffs(params: JacobiParams, j: int) -> CouplingCoeffs:
    """Coefficients (u_j, d_j, l_j) of psi_j = r_j + u_j I_{j+1} + d_j I_j + l_j I_{j-1}.

    Raises:
        ParameterError: If j < 1
        IntegrabilityError: If alpha <= 0 or beta <= 0
    """
    if j < 1:
        raise ParameterError(f"coupling coefficients need j >= 1, got {j}")
    u, d, l = coupling_arrays(params, np.array([j]))  # noqa: E741
    return CouplingCoeffs(j=j, u=float(u[0]), d=float(d[0]), l=float(l[0]))


def coupling_arrays(
    params: JacobiParams, j: FloatArray
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Vectorized u_j, d_j, l_j for an array of degrees j >= 1; needs alpha, beta > 0."""
    if params.alpha <= 0.0 or params.beta <= 0.0:
        raise IntegrabilityError(f"coupling coefficients need alpha > 0 and beta > 0, got {params}")
    s, dl = params.sigma, params.delta
    j = np.asarray(j, dtype=np.float64)
    a, b, c = recurrence_arrays(params, j)
    scale = 2.0 / (j + s + 1.0)
    return scale * s * a, scale * (dl + s * b), scale * s * c


def jacobi_table(params: JacobiParams, max_degree: int, x: FloatArray) -> FloatArray:
    """P_0..P_J at every point of x, as an array of shape (len(x), J+1)."""
    if max_degree < 0:
        raise ParameterError(f"max_degree must be >= 0, got {max_degree}")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    table = np.empty((x.shape[0], max_degree + 1), dtype=np.float64)
    table[:, 0] = 1.0
    if max_degree == 0:
        return table
    al, be = params.alpha, params.beta
    table[:, 1] = 0.5 * (al + be + 2.0) * x + 0.5 * (al - be)
    if max_degree == 1:
        return table
    a, b, c = recurrence_arrays(params, np.arange(1, max_degree))
    for j in range(1, max_degree):
        table[:, j + 1] = ((x - b[j - 1]) * table[:, j] - c[j - 1] * table[:, j - 1]) / a[j - 1]
    return table


def eval_jacobi(params: JacobiParams, max_degree: int, x: float) -> FloatArray:
    """Values P_0(x), ..., P_J(x)."""
    _check_point(x)
    return jacobi_table(params, max_degree, np.array([x]))[0]


def jacobi_norm(params: JacobiParams, j: int) -> float:
    """K_j = int P_j^2 w, from the Gamma-ratio formula in log-Gamma arithmetic."""
    if j < 0:
        raise ParameterError(f"degree must be >= 0, got {j}")
    al, be, s = params.alpha, params.beta, params.sigma
    if j == 0:
        # (2j+s+1) Gamma(j+s+1) = Gamma(s+2) at j = 0; also covers s = -1
        log_k = (s + 1.0) * math.log(2.0) + gammaln(al + 1.0) + gammaln(be + 1.0) - gammaln(s + 2.0)
    else:
        log_k = (
            (s + 1.0) * math.log(2.0)
            - math.log(2.0 * j + s + 1.0)
            + gammaln(j + al + 1.0)
            + gammaln(j + be + 1.0)
            - gammaln(j + 1.0)
            - gammaln(j + s + 1.0)
        )
    return math.exp(float(log_k))


def eval_orthonormal(params: JacobiParams, j: int, x: float) -> float:
    """Orthonormal polynomial P_j(x) / sqrt(K_j)."""
    if j < 0:
        raise ParameterError(f"degree must be >= 0, got {j}")
    return float(eval_jacobi(params, j, x)[j]) / math.sqrt(jacobi_norm(params, j))


def eval_jacobi_derivative(params: JacobiParams, j: int, x: float) -> float:
    """d/dt P_j = (j + alpha + beta + 1)/2 * P_{j-1}^{(alpha+1, beta+1)}."""
    if j < 0:
        raise ParameterError(f"degree must be >= 0, got {j}")
    _check_point(x)
    if j == 0:
        return 0.0
    lower = eval_jacobi(params.shifted(), j - 1, x)[j - 1]
    return 0.5 * (j + params.sigma + 1.0) * float(lower)


def gamma_ratio(n: float, a: float, b: float) -> float:
    """Gamma(n+a) / Gamma(n+b) * n^(b-a), which tends to 1 as n grows."""
    if n <= 0 or n + a <= 0 or n + b <= 0:
        raise ParameterError("gamma_ratio needs n > 0, n + a > 0 and n + b > 0")
    log_r = gammaln(n + a) - gammaln(n + b) + (b - a) * math.log(n)
    return math.exp(float(log_r))


def weighted_envelope(params: JacobiParams, max_degree: int, grid: FloatArray) -> FloatArray:
    """(j+1) * max over the grid of |P_j w|^2, for j = 0..J."""
    grid = np.asarray(grid, dtype=np.float64)
    if np.any(np.abs(grid) > 1.0):
        raise DomainError(float(grid[np.argmax(np.abs(grid))]))
    w = weight_values(params.exponents, grid)
    table = jacobi_table(params, max_degree, grid) * w[:, None]
    degrees = np.arange(max_degree + 1, dtype=np.float64)
    return (degrees + 1.0) * np.max(table * table, axis=0)
