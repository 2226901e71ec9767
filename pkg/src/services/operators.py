"""Histopolation matrices and the factorization identities between them.

Cell integrals of Jacobi polynomials are taken in bulk: one composite rule per
mesh, the full recurrence table evaluated on chunks of quadrature points, and a
sparse aggregation onto cells. Primitives at the nodes are prefix sums of those
cell integrals.
"""

import logging
from collections.abc import Callable

import numpy as np

from src.models.arrays import DenseMatrix, FloatArray
from src.models.mesh import Mesh
from src.models.operators import FactorizationReport, HistoBasis, LemmaReport, OperatorBundle
from src.models.params import JacobiParams
from src.services.jacobi import (
    coupling_arrays,
    jacobi_table,
    recurrence_arrays,
    weight_values,
)
from src.services.quadrature import QuadratureService, create_quadrature_service
from src.utils.errors import DomainError, IntegrabilityError, ParameterError

logger = logging.getLogger(__name__)

# Entries of one evaluated Jacobi table chunk.
DEFAULT_CHUNK_ENTRIES = 1 << 22


def _require_positive(params: JacobiParams, what: str) -> None:
    if params.alpha <= 0.0 or params.beta <= 0.0:
        raise IntegrabilityError(f"{what} needs alpha > 0 and beta > 0, got {params}")


def _relative_frobenius(residual: DenseMatrix, reference: DenseMatrix) -> float:
    ref = float(np.linalg.norm(reference))
    res = float(np.linalg.norm(residual))
    return res / ref if ref > 0.0 else res


class OperatorBuilder:
    """Builds H, Delta, Psi, R, Iext, TJ and the Gram matrix for one quadrature setup."""

    def __init__(
        self,
        quadrature: QuadratureService,
        chunk_entries: int = DEFAULT_CHUNK_ENTRIES,
    ) -> None:
        """
        Initialize the OperatorBuilder.

        Args:
            quadrature: Service providing composite panel rules
            chunk_entries: Upper bound on entries of one evaluated polynomial table
        """
        self.quadrature = quadrature
        self.chunk_entries = chunk_entries

    # ------------------------------------------------------------ bulk moments

    def cell_moments(
        self,
        nodes: FloatArray,
        poly: JacobiParams,
        n_cols: int,
        exponents: tuple[float, float],
        multiply_t: bool = False,
    ) -> DenseMatrix:
        """M[i, j] = int over cell i of P_j^{poly}(t) (t if multiply_t) w(t), j < n_cols."""
        if n_cols < 1:
            raise ParameterError(f"n_cols must be >= 1, got {n_cols}")
        rule = self.quadrature.panel_rule(nodes, exponents, n_cols + 2)
        agg = rule.aggregation_matrix(rule.points if multiply_t else None)
        out = np.zeros((rule.n_cells, n_cols), dtype=np.float64)
        step = max(256, self.chunk_entries // n_cols)
        for start in range(0, rule.size, step):
            stop = min(start + step, rule.size)
            table = jacobi_table(poly, n_cols - 1, rule.points[start:stop])
            out += agg[:, start:stop] @ table
        logger.debug(
            f"Cell moments: {rule.n_cells} cells, {n_cols} columns, "
            f"{rule.n_panels} panels, {rule.size} points"
        )
        return out

    def primitive_table(
        self,
        nodes: FloatArray,
        poly: JacobiParams,
        n_cols: int,
        exponents: tuple[float, float],
        multiply_t: bool = False,
    ) -> DenseMatrix:
        """Running integrals from nodes[0] to every node, shape (len(nodes), n_cols)."""
        moments = self.cell_moments(nodes, poly, n_cols, exponents, multiply_t)
        return np.vstack([np.zeros((1, n_cols)), np.cumsum(moments, axis=0)])

    # ---------------------------------------------------------------- builders

    def build_H(  # noqa: N802
        self, params: JacobiParams, mesh: Mesh, basis: HistoBasis = HistoBasis.SHIFTED
    ) -> DenseMatrix:
        """[H]_{i,j} = (1/h_i) int_{s_i} phi_{j-1} w_{alpha,beta}."""
        moments = self.cell_moments(
            mesh.nodes, basis.polynomial_params(params), mesh.n_cells, params.exponents
        )
        return moments / mesh.widths[:, None]

    def build_H_standard_exact(  # noqa: N802
        self, params: JacobiParams, mesh: Mesh
    ) -> DenseMatrix:
        """Standard-basis H from the closed-form primitive of P_n w, n >= 1.

        The first column still comes from quadrature.
        """
        n = mesh.n_cells
        out = np.empty((n, n), dtype=np.float64)
        out[:, 0] = self.cell_moments(mesh.nodes, params, 1, params.exponents)[:, 0]
        if n > 1:
            degrees = np.arange(1, n, dtype=np.float64)
            upper = params.shifted()
            table = jacobi_table(upper, n - 2, mesh.nodes)
            weights = weight_values(upper.exponents, mesh.nodes)[:, None]
            primitive = -weights * table / (2.0 * degrees)
            out[:, 1:] = np.diff(primitive, axis=0)
        return out / mesh.widths[:, None]

    def standard_primitive(self, params: JacobiParams, n: int, x: FloatArray) -> FloatArray:
        """int_{-1}^x P_n w_{alpha,beta}.

        Equals -w_{alpha+1,beta+1}(x) P_{n-1}^{(alpha+1,beta+1)}(x) / (2n).
        """
        if n < 1:
            raise ParameterError(f"closed-form primitive needs n >= 1, got {n}")
        x = np.asarray(x, dtype=np.float64)
        upper = params.shifted()
        values = jacobi_table(upper, n - 1, x)[:, n - 1]
        return -weight_values(upper.exponents, x) * values / (2.0 * n)

    def build_Delta(self, mesh: Mesh) -> DenseMatrix:  # noqa: N802
        """Backward differences [Delta u]_i = (u_i - u_{i-1}) / h_i, shape N x (N+1)."""
        n = mesh.n_cells
        inv_h = 1.0 / mesh.widths
        out = np.zeros((n, n + 1), dtype=np.float64)
        rows = np.arange(n)
        out[rows, rows] = -inv_h
        out[rows, rows + 1] = inv_h
        return out

    def primitive_psi(self, params: JacobiParams, j: int, mesh: Mesh) -> FloatArray:
        """psi_j(x_k), k = 0..N, for psi_j = int_{-1}^x P_{j-1}^{(alpha+1,beta+1)} w."""
        if j < 1:
            raise ParameterError(f"primitive index must be >= 1, got {j}")
        table = self.primitive_table(mesh.nodes, params.shifted(), j, params.exponents)
        return table[:, j - 1]

    def build_Psi(self, params: JacobiParams, mesh: Mesh) -> DenseMatrix:  # noqa: N802
        """[Psi]_{k+1,j} = psi_j(x_k), shape (N+1) x N."""
        return self.primitive_table(mesh.nodes, params.shifted(), mesh.n_cells, params.exponents)

    def primitive_I(self, params: JacobiParams, j: int, x: float) -> float:  # noqa: N802
        """I_j(x) = int_{-1}^x P_j w_{alpha-1,beta-1}."""
        return self._point_primitive(params, j, x, multiply_t=False)

    def primitive_J(self, params: JacobiParams, j: int, x: float) -> float:  # noqa: N802
        """J_j(x) = int_{-1}^x t P_j w_{alpha-1,beta-1}."""
        return self._point_primitive(params, j, x, multiply_t=True)

    def _point_primitive(self, params: JacobiParams, j: int, x: float, multiply_t: bool) -> float:
        _require_positive(params, "I_j and J_j")
        if j < 0:
            raise ParameterError(f"degree must be >= 0, got {j}")
        if not -1.0 <= x <= 1.0:
            raise DomainError(x)
        if x == -1.0:
            return 0.0

        def integrand(t: FloatArray) -> FloatArray:
            values = jacobi_table(params, j, t)[:, j]
            return values * t if multiply_t else values

        return self.quadrature.integrate_exponents(
            integrand, params.shifted(-1.0).exponents, -1.0, x
        )[0]

    def build_R(self, params: JacobiParams, mesh: Mesh) -> DenseMatrix:  # noqa: N802
        """[R]_{k+1,j} = 2/(j+sigma+1) P_j(x_k) w(x_k); endpoint rows are exactly zero."""
        _require_positive(params, "R")
        n = mesh.n_cells
        out = np.zeros((n + 1, n), dtype=np.float64)
        if n < 2:
            return out
        interior = mesh.nodes[1:-1]
        degrees = np.arange(1, n + 1, dtype=np.float64)
        table = jacobi_table(params, n, interior)[:, 1:]
        w = weight_values(params.exponents, interior)
        out[1:-1, :] = table * w[:, None] * (2.0 / (degrees + params.sigma + 1.0))
        return out

    def build_Iext(self, params: JacobiParams, mesh: Mesh) -> DenseMatrix:  # noqa: N802
        """[Iext]_{k+1,r+1} = I_r(x_k), r = 0..N+1, shape (N+1) x (N+2)."""
        _require_positive(params, "Iext")
        return self.primitive_table(
            mesh.nodes, params, mesh.n_cells + 2, params.shifted(-1.0).exponents
        )

    def build_TJ(self, params: JacobiParams, N: int) -> DenseMatrix:  # noqa: N802, N803
        """(N+2) x N with l_j, d_j, u_j on rows j, j+1, j+2 of column j."""
        if N < 1:
            raise ParameterError(f"N must be >= 1, got {N}")
        u, d, l = coupling_arrays(params, np.arange(1, N + 1))  # noqa: E741
        out = np.zeros((N + 2, N), dtype=np.float64)
        cols = np.arange(N)
        out[cols, cols] = l
        out[cols + 1, cols] = d
        out[cols + 2, cols] = u
        return out

    def build_bundle(self, params: JacobiParams, mesh: Mesh) -> OperatorBundle:
        """Every factor of H = Delta Psi and Psi = R + Iext TJ, in the shifted basis."""
        _require_positive(params, "the factorization")
        logger.debug(
            f"Building operator bundle for {params} on a {mesh.name} mesh, N={mesh.n_cells}"
        )
        return OperatorBundle(
            params=params,
            H=self.build_H(params, mesh, HistoBasis.SHIFTED),
            Delta=self.build_Delta(mesh),
            Psi=self.build_Psi(params, mesh),
            R=self.build_R(params, mesh),
            Iext=self.build_Iext(params, mesh),
            TJ=self.build_TJ(params, mesh.n_cells),
        )

    def verify_factorization(
        self, params: JacobiParams, mesh: Mesh, bundle: OperatorBundle | None = None
    ) -> FactorizationReport:
        """Relative Frobenius residuals of H = Delta Psi and Psi = R + Iext TJ."""
        if bundle is None:
            bundle = self.build_bundle(params, mesh)
        r1 = _relative_frobenius(bundle.H - bundle.Delta @ bundle.Psi, bundle.H)
        r2 = _relative_frobenius(bundle.Psi - bundle.R - bundle.Iext @ bundle.TJ, bundle.Psi)
        logger.debug(f"Factorization residuals at N={bundle.n}: r1={r1:.3e}, r2={r2:.3e}")
        return FactorizationReport(n=bundle.n, r1=r1, r2=r2)

    # ----------------------------------------------------------- Gram matrices

    def _interval_chunks(
        self, params: JacobiParams, N: int  # noqa: N803
    ) -> list[tuple[DenseMatrix, FloatArray]]:
        if params.alpha <= -0.5 or params.beta <= -0.5:
            raise IntegrabilityError(f"the squared weight needs alpha, beta > -1/2, got {params}")
        exponents = (2.0 * params.alpha, 2.0 * params.beta)
        rule = self.quadrature.interval_rule(exponents, 2 * (N - 1))
        step = max(256, self.chunk_entries // N)
        chunks = []
        for start in range(0, rule.size, step):
            stop = min(start + step, rule.size)
            table = jacobi_table(params, N - 1, rule.points[start:stop])
            chunks.append((table, rule.weights[start:stop]))
        return chunks

    def build_gram(self, params: JacobiParams, N: int) -> DenseMatrix:  # noqa: N803
        """G[l, k] = int P_{l-1} P_{k-1} w^2 over [-1, 1], standard basis, N x N."""
        if N < 1:
            raise ParameterError(f"N must be >= 1, got {N}")
        gram = np.zeros((N, N), dtype=np.float64)
        for table, scale in self._interval_chunks(params, N):
            gram += table.T @ (table * scale[:, None])
        return 0.5 * (gram + gram.T)

    def gram_diagonal(self, params: JacobiParams, N: int) -> FloatArray:  # noqa: N803
        """int P_j^2 w^2 for j = 0..N-1, without forming the full Gram matrix."""
        if N < 1:
            raise ParameterError(f"N must be >= 1, got {N}")
        diag = np.zeros(N, dtype=np.float64)
        for table, scale in self._interval_chunks(params, N):
            diag += scale @ (table * table)
        return diag

    # ------------------------------------------------------------------ checks

    def cell_averages(
        self, f: Callable[[FloatArray], FloatArray], params: JacobiParams, mesh: Mesh
    ) -> FloatArray:
        """b_i = (1/h_i) int_{s_i} f w_{alpha,beta}, adaptively per cell."""
        widths = mesh.widths
        nodes = mesh.nodes
        tol = self.quadrature.tol
        out = np.empty(mesh.n_cells, dtype=np.float64)
        for i in range(mesh.n_cells):
            value, _ = self.quadrature.integrate_exponents(
                f, params.exponents, float(nodes[i]), float(nodes[i + 1]), tol * widths[i]
            )
            out[i] = value / widths[i]
        return out

    def lemma_residuals(
        self, params: JacobiParams, j_max: int = 30, n_samples: int = 51
    ) -> LemmaReport:
        """Max pointwise residuals of the two primitive identities on an equispaced grid.

        psi_j = 2/(j+sigma+1) (P_j w + delta I_j + sigma J_j) and
        J_j = a_j I_{j+1} + b_j I_j + c_j I_{j-1}, for j = 1..j_max.
        """
        _require_positive(params, "the primitive identities")
        if j_max < 1 or n_samples < 2:
            raise ParameterError("lemma residuals need j_max >= 1 and n_samples >= 2")
        x = np.linspace(-1.0, 1.0, n_samples)
        lower = params.shifted(-1.0).exponents
        psi = self.primitive_table(x, params.shifted(), j_max, params.exponents)
        big_i = self.primitive_table(x, params, j_max + 2, lower)
        big_j = self.primitive_table(x, params, j_max + 1, lower, multiply_t=True)
        p_w = jacobi_table(params, j_max, x) * weight_values(params.exponents, x)[:, None]

        j = np.arange(1, j_max + 1)
        scale = 2.0 / (j + params.sigma + 1.0)
        ibp = psi - scale * (p_w[:, j] + params.delta * big_i[:, j] + params.sigma * big_j[:, j])
        a, b, c = recurrence_arrays(params, j)
        local = big_j[:, j] - (a * big_i[:, j + 1] + b * big_i[:, j] + c * big_i[:, j - 1])
        return LemmaReport(
            j_max=j_max,
            n_samples=n_samples,
            integration_by_parts_max=float(np.max(np.abs(ibp))),
            tridiagonal_locality_max=float(np.max(np.abs(local))),
        )

    def primitive_I_sup(  # noqa: N802
        self, params: JacobiParams, j_max: int, grid: FloatArray
    ) -> FloatArray:
        """max over an ascending grid starting at -1 of |I_j|, j = 0..j_max."""
        _require_positive(params, "I_j")
        grid = np.asarray(grid, dtype=np.float64)
        if grid[0] != -1.0:
            raise ParameterError("grid must start at -1")
        table = self.primitive_table(grid, params, j_max + 1, params.shifted(-1.0).exponents)
        return np.max(np.abs(table), axis=0)


def weighted_column_norms(H: DenseMatrix, mesh: Mesh) -> FloatArray:  # noqa: N803
    """||D_h^{1/2} H e_j||^2 = sum_i h_i H_ij^2 per column."""
    if H.shape[0] != mesh.n_cells:
        raise ParameterError(f"H has {H.shape[0]} rows but the mesh has {mesh.n_cells} cells")
    return mesh.widths @ (H * H)


def create_operator_builder() -> OperatorBuilder:
    """
    Create an OperatorBuilder instance using application settings.

    Returns:
        Configured OperatorBuilder instance
    """
    return OperatorBuilder(quadrature=create_quadrature_service())
