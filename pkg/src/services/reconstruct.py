"""End-to-end histopolation: cell averages, dense solve, evaluation and verification."""

import logging
import math
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pandas as pd
import scipy.linalg
from scipy.interpolate import CubicSpline

from src.models.arrays import DenseMatrix, FloatArray
from src.models.mesh import Mesh
from src.models.operators import HistoBasis
from src.models.params import JacobiParams
from src.models.reconstruct import Histopolant
from src.services.jacobi import jacobi_table
from src.services.operators import OperatorBuilder, create_operator_builder
from src.utils.errors import ConfigurationError, DomainError, ParameterError, SingularMatrixError

logger = logging.getLogger(__name__)

Target = Callable[[FloatArray], FloatArray]

TARGET_FUNCTIONS: dict[str, Target] = {
    "one": lambda t: np.ones_like(t),
    "exp": lambda t: np.exp(t),
    "runge": lambda t: 1.0 / (1.0 + 25.0 * t * t),
    "cubic": lambda t: t**3 + 1.0,
}


def load_tabulated_target(path: Path | str) -> Target:
    """Cubic-spline interpolant of a two-column table (x, f(x)) covering [-1, 1].

    Raises:
        ConfigurationError: If the file is unreadable or does not span [-1, 1]
    """
    path = Path(path)
    try:
        df = pd.read_csv(path, header=None, comment="#", sep=r"[,\s]+", engine="python")
    except (OSError, ValueError, pd.errors.EmptyDataError) as e:
        raise ConfigurationError(f"cannot read target table {path}: {e}") from e
    if df.shape[1] != 2:
        raise ConfigurationError(f"target table {path} must have two columns, got {df.shape[1]}")
    try:
        df = df.astype(np.float64).sort_values(0)
    except ValueError as e:
        raise ConfigurationError(f"target table {path} has non-numeric entries: {e}") from e
    x = df.iloc[:, 0].to_numpy()
    y = df.iloc[:, 1].to_numpy()
    if x.shape[0] < 4 or x[0] > -1.0 or x[-1] < 1.0 or np.any(np.diff(x) <= 0.0):
        raise ConfigurationError(
            f"target table {path} needs at least 4 distinct abscissae spanning [-1, 1]"
        )
    logger.info(f"Loaded {x.shape[0]} tabulated target samples from {path}")
    spline = CubicSpline(x, y)
    return lambda t: np.asarray(spline(t), dtype=np.float64)


class HistopolationSolver:
    """Solves H c = b for the histopolant coefficients and checks the result."""

    def __init__(self, builder: OperatorBuilder, condition_limit: float = 1e14) -> None:
        """
        Initialize the HistopolationSolver.

        Args:
            builder: Operator builder for H and cell averages
            condition_limit: Largest accepted 1-norm condition estimate of H
        """
        self.builder = builder
        self.condition_limit = condition_limit

    def solve_histopolation(
        self,
        params: JacobiParams,
        mesh: Mesh,
        basis: HistoBasis,
        b: FloatArray,
        H: DenseMatrix | None = None,  # noqa: N803
    ) -> Histopolant:
        """Coefficients of the histopolant with weighted cell averages b.

        Args:
            params: Jacobi parameters of the weight
            mesh: Partition of [-1, 1]
            basis: Polynomial basis of the histopolant
            b: Weighted cell averages, one per cell
            H: Prebuilt histopolation matrix for this basis, if available

        Returns:
            Histopolant with relative residual and condition estimate

        Raises:
            SingularMatrixError: If the condition estimate exceeds the limit
        """
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (mesh.n_cells,):
            raise ParameterError(f"b has shape {b.shape}, expected ({mesh.n_cells},)")
        if H is None:
            H = self.builder.build_H(params, mesh, basis)  # noqa: N806

        lu, piv = scipy.linalg.lu_factor(H, check_finite=False)
        anorm = float(np.linalg.norm(H, 1))
        rcond, _ = scipy.linalg.lapack.dgecon(lu, anorm, norm="1")
        condition = math.inf if rcond == 0.0 else 1.0 / float(rcond)
        if condition > self.condition_limit:
            logger.error(f"Refusing solve at N={mesh.n_cells}: condition estimate {condition:.3e}")
            raise SingularMatrixError(condition, self.condition_limit)

        coeffs = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
        b_norm = float(np.linalg.norm(b))
        gap = float(np.linalg.norm(H @ coeffs - b))
        residual = gap / b_norm if b_norm > 0.0 else gap
        logger.debug(
            f"Solved N={mesh.n_cells} ({basis.value} basis): residual={residual:.3e}, "
            f"condition={condition:.3e}"
        )
        return Histopolant(
            coeffs=coeffs, basis=basis, params=params, residual=residual, condition=condition
        )

    def reconstruct(
        self,
        f: Target,
        params: JacobiParams,
        mesh: Mesh,
        basis: HistoBasis = HistoBasis.SHIFTED,
    ) -> tuple[Histopolant, FloatArray]:
        """Histopolant of f from its weighted cell averages, and those averages."""
        b = self.builder.cell_averages(f, params, mesh)
        return self.solve_histopolation(params, mesh, basis, b), b

    def verify_averages(self, p: Histopolant, mesh: Mesh, b: FloatArray) -> float:
        """max_i |(1/h_i) int_{s_i} p w - b_i|."""
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (mesh.n_cells,) or p.coeffs.shape != (mesh.n_cells,):
            raise ParameterError("histopolant, mesh and averages must share the same N")
        rule = self.builder.quadrature.panel_rule(mesh.nodes, p.params.exponents, mesh.n_cells + 2)
        averages = rule.sum_by_cell(evaluate_histopolant(p, rule.points)) / mesh.widths
        return float(np.max(np.abs(averages - b)))


def evaluate_histopolant(p: Histopolant, x: float | FloatArray) -> float | FloatArray:
    """sum_j c_j phi_{j-1}(x) in one recurrence pass over all degrees."""
    points = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(np.abs(points) > 1.0):
        raise DomainError(float(points[np.argmax(np.abs(points))]))
    table = jacobi_table(p.basis.polynomial_params(p.params), p.degree, points)
    values = table @ p.coeffs
    return float(values[0]) if np.ndim(x) == 0 else values


def create_histopolation_solver() -> HistopolationSolver:
    """
    Create a HistopolationSolver instance using application settings.

    Returns:
        Configured HistopolationSolver instance
    """
    from src.config import get_settings

    return HistopolationSolver(
        builder=create_operator_builder(),
        condition_limit=get_settings().condition_limit,
    )
