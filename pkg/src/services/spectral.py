"""Singular values, threshold fractions, symbol sampling and rearrangement comparison."""

import logging
import math
from collections.abc import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg

from src.models.arrays import DenseMatrix, FloatArray
from src.models.mesh import Mesh, MeshMap
from src.models.params import JacobiParams
from src.models.spectral import (
    DecayRecord,
    RearrangementComparison,
    ScalingSpec,
    SymbolSamples,
    ZeroDistributionReport,
)
from src.utils.errors import ParameterError, SpectralError
from src.utils.parallel import bounded_map

logger = logging.getLogger(__name__)

MIN_COMPARISON_LENGTH = 10


def singular_values(A: DenseMatrix) -> FloatArray:  # noqa: N803
    """All min(m, n) singular values of a dense matrix, descending.

    Raises:
        SpectralError: If A has non-finite entries or the SVD does not converge
    """
    A = np.asarray(A, dtype=np.float64)  # noqa: N806
    if A.ndim != 2:
        raise SpectralError(f"expected a matrix, got an array of shape {A.shape}")
    if min(A.shape) == 0:
        return np.zeros(0, dtype=np.float64)
    if not np.all(np.isfinite(A)):
        raise SpectralError("matrix has non-finite entries")
    try:
        return scipy.linalg.svdvals(A, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        logger.error(f"SVD failed for a {A.shape[0]}x{A.shape[1]} matrix: {e}")
        raise SpectralError(f"SVD did not converge: {e}") from e


def threshold_fraction(svals: FloatArray, eps: float, N: int) -> float:  # noqa: N803
    """q_N(eps) = #{j : sigma_j > eps} / N."""
    if eps <= 0.0:
        raise ParameterError(f"eps must be positive, got {eps}")
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N}")
    return int(np.count_nonzero(np.asarray(svals) > eps)) / N


def scalar_factor(spec: ScalingSpec, N: int) -> float:  # noqa: N803
    """Multiplier of a scalar scaling at size N."""
    if spec.kind == "none":
        return 1.0
    if spec.kind == "divide_by_N_pow":
        return float(N) ** (-spec.gamma)
    if spec.kind == "divide_by_logN_pow":
        if N < 2:
            raise ParameterError("log scaling needs N >= 2")
        return math.log(N) ** (-spec.gamma)
    raise ParameterError(f"scaling '{spec.kind}' is not a scalar multiple")


def apply_scaling(
    A: DenseMatrix, spec: ScalingSpec, N: int, mesh: Mesh | None = None  # noqa: N803
) -> DenseMatrix:
    """A / N^gamma, A / (log N)^gamma, or N^gamma D_h^{1/2} A."""
    if spec.kind == "none":
        return A.copy()
    if spec.kind == "divide_by_N_pow":
        return A / float(N) ** spec.gamma
    if spec.is_scalar:
        return A * scalar_factor(spec, N)
    if mesh is None:
        raise ParameterError("premultiplication by D_h^{1/2} needs a mesh")
    if A.shape[0] != mesh.n_cells:
        raise ParameterError(f"A has {A.shape[0]} rows but the mesh has {mesh.n_cells} cells")
    return (float(N) ** spec.gamma) * np.sqrt(mesh.widths)[:, None] * A


def scale_singular_values(svals: FloatArray, spec: ScalingSpec, N: int) -> FloatArray:  # noqa: N803
    """Singular values of a scalar-scaled matrix from those of the unscaled one."""
    return np.asarray(svals, dtype=np.float64) * abs(scalar_factor(spec, N))


def _midpoint_grid(grid_m: int) -> tuple[FloatArray, FloatArray]:
    k = np.arange(grid_m, dtype=np.float64)
    y = (k + 0.5) / grid_m
    theta = -np.pi + (2.0 * k + 1.0) * np.pi / grid_m
    return y, theta


def _rearranged(values: FloatArray, grid_m: int, trim: tuple[float, float]) -> SymbolSamples:
    flat = np.sort(np.abs(values).reshape(-1))[::-1]
    return SymbolSamples(values=flat, grid_m=grid_m, trim=trim)


def tj_symbol(params: JacobiParams, y: FloatArray, theta: FloatArray) -> FloatArray:
    """(2/y) |delta + sigma cos(theta)|, broadcast over y and theta."""
    y = np.asarray(y, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    return (2.0 / y) * np.abs(params.delta + params.sigma * np.cos(theta))


def delta_symbol(gmap: MeshMap, y: FloatArray, theta: FloatArray) -> FloatArray:
    """|2 sin(theta/2)| / (2 g'(y)), broadcast over y and theta."""
    theta = np.asarray(theta, dtype=np.float64)
    g_prime = gmap.derivative(np.asarray(y, dtype=np.float64))
    return np.abs(2.0 * np.sin(0.5 * theta)) / (2.0 * g_prime)


def sample_symbol_TJ(  # noqa: N802
    params: JacobiParams, grid_m: int, trim: tuple[float, float] = (0.05, 0.95)
) -> SymbolSamples:
    """Rearranged samples of tj_symbol on the midpoint grid."""
    if grid_m < 2:
        raise ParameterError(f"grid_m must be >= 2, got {grid_m}")
    y, theta = _midpoint_grid(grid_m)
    return _rearranged(tj_symbol(params, y[:, None], theta[None, :]), grid_m, trim)


def sample_symbol_Delta(  # noqa: N802
    gmap: MeshMap, grid_m: int, trim: tuple[float, float] = (0.05, 0.95)
) -> SymbolSamples:
    """Rearranged samples of delta_symbol, the symbol of Delta_N / N.

    Raises:
        SpectralError: If g' is not positive at a sample point
    """
    if grid_m < 2:
        raise ParameterError(f"grid_m must be >= 2, got {grid_m}")
    y, theta = _midpoint_grid(grid_m)
    g_prime = gmap.derivative(y)
    if np.any(~np.isfinite(g_prime)) or np.any(g_prime <= 0.0):
        raise SpectralError(f"map '{gmap.name}' has g' <= 0 on the sample grid")
    return _rearranged(delta_symbol(gmap, y[:, None], theta[None, :]), grid_m, trim)


def sample_symbol_trigonometric(
    coeffs: Mapping[int, float], grid_m: int, trim: tuple[float, float] = (0.05, 0.95)
) -> SymbolSamples:
    """|sum_k t_k e^{i k theta}| on the midpoint grid; constant in y."""
    if grid_m < 2:
        raise ParameterError(f"grid_m must be >= 2, got {grid_m}")
    _, theta = _midpoint_grid(grid_m)
    symbol = np.zeros(grid_m, dtype=np.complex128)
    for k, t_k in coeffs.items():
        symbol += t_k * np.exp(1j * k * theta)
    return _rearranged(np.tile(np.abs(symbol), grid_m), grid_m, trim)


def banded_toeplitz(coeffs: Mapping[int, float], n: int) -> DenseMatrix:
    """n x n Toeplitz matrix with [T]_{r,c} = t_{r-c}, the section of sum_k t_k e^{i k theta}."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    column = np.zeros(n, dtype=np.float64)
    row = np.zeros(n, dtype=np.float64)
    for k, t_k in coeffs.items():
        if 0 <= k < n:
            column[k] = t_k
        if -n < k <= 0:
            row[-k] = t_k
    return scipy.linalg.toeplitz(column, row)


def compare_rearrangements(svals: FloatArray, sym: SymbolSamples) -> RearrangementComparison:
    """Relative deviation of sorted singular values from the resampled symbol rearrangement.

    Symbol samples are resampled to the singular-value quantiles (k - 1/2)/d by linear
    interpolation; deviations are taken over the trim window of the samples.

    Raises:
        SpectralError: If fewer than 10 singular values are given or the window is empty
    """
    s = np.sort(np.asarray(svals, dtype=np.float64))[::-1]
    d = s.shape[0]
    if d < MIN_COMPARISON_LENGTH:
        raise SpectralError(f"need at least {MIN_COMPARISON_LENGTH} singular values, got {d}")
    quantiles = (np.arange(d, dtype=np.float64) + 0.5) / d
    m = sym.values.shape[0]
    positions = (np.arange(m, dtype=np.float64) + 0.5) / m
    symbol_values = np.interp(quantiles, positions, sym.values)

    lo, hi = sym.trim
    window = (quantiles >= lo) & (quantiles <= hi)
    if not np.any(window):
        raise SpectralError(f"trimmed quantile window [{lo}, {hi}] holds no samples")
    ref = symbol_values[window]
    gap = np.abs(s[window] - ref)
    rel = np.divide(gap, np.abs(ref), out=np.where(gap > 0.0, np.inf, 0.0), where=ref != 0.0)
    return RearrangementComparison(
        quantiles=quantiles,
        sigma_values=s,
        symbol_values=symbol_values,
        window=(lo, hi),
        max_relative_deviation=float(np.max(rel)),
        mean_relative_deviation=float(np.mean(rel)),
    )


def is_monotone_decay(series: Sequence[float], inversion_tolerance: float = 0.05) -> bool | None:
    """Strict decrease along the series, allowing one small adjacent inversion.

    Adjacent zeros count as decayed. Returns None for fewer than two entries.
    """
    if len(series) < 2:
        return None
    inversions = 0
    for prev, cur in zip(series[:-1], series[1:]):
        if cur < prev or (cur == 0.0 and prev == 0.0):
            continue
        if prev > 0.0 and (cur - prev) / prev <= inversion_tolerance and inversions == 0:
            inversions += 1
            logger.warning(f"Tolerated inversion in threshold fractions: {prev:.6g} -> {cur:.6g}")
            continue
        return False
    return True


def decay_report(
    family: str,
    scaling: ScalingSpec,
    svals_by_n: Mapping[int, FloatArray],
    eps_list: Sequence[float],
    inversion_tolerance: float = 0.05,
) -> ZeroDistributionReport:
    """q_N(eps) records and per-eps decay flags from already scaled singular values."""
    records = [
        DecayRecord(
            N=n,
            scaling=scaling.kind,
            gamma=scaling.gamma,
            eps=eps,
            q=threshold_fraction(svals_by_n[n], eps, n),
        )
        for n in sorted(svals_by_n)
        for eps in eps_list
    ]
    report = ZeroDistributionReport(family=family, scaling=scaling, records=records)
    flags = {
        eps: is_monotone_decay(report.q_series(eps), inversion_tolerance) for eps in eps_list
    }
    return report.model_copy(update={"decay_flags": flags})


def zero_distribution_probe(
    build: Callable[[int], DenseMatrix],
    scaling: ScalingSpec,
    n_list: Sequence[int],
    eps_list: Sequence[float],
    family: str = "family",
    mesh_for: Callable[[int], Mesh] | None = None,
    workers: int = 1,
    inversion_tolerance: float = 0.05,
) -> ZeroDistributionReport:
    """Threshold fractions of a scaled matrix family over an N-list.

    Args:
        build: Matrix of the family at size N
        scaling: Normalization applied before counting
        n_list: Sizes, ascending
        eps_list: Positive thresholds
        family: Label carried into the report
        mesh_for: Mesh at size N, required for D_h^{1/2} premultiplication
        workers: Worker threads for the per-N SVDs
        inversion_tolerance: Relative size of the one tolerated inversion

    Returns:
        ZeroDistributionReport keyed by N, independent of completion order
    """
    if list(n_list) != sorted(set(n_list)):
        raise ParameterError("n_list must be strictly increasing")

    def scaled_svals(n: int) -> FloatArray:
        matrix = build(n)
        if scaling.is_scalar:
            return scale_singular_values(singular_values(matrix), scaling, n)
        mesh = mesh_for(n) if mesh_for is not None else None
        return singular_values(apply_scaling(matrix, scaling, n, mesh))

    svals_by_n = bounded_map(scaled_svals, list(n_list), workers)
    logger.info(f"Probed {family} under {scaling.label} at N={list(n_list)}")
    return decay_report(family, scaling, svals_by_n, eps_list, inversion_tolerance)
