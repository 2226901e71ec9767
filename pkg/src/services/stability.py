"""Mesh-weighted norms and the Gram-matrix stability bounds of the standard-basis histopolant."""

import logging
import math
from collections.abc import Sequence

import numpy as np
import scipy.linalg

from src.models.arrays import DenseMatrix, FloatArray
from src.models.mesh import Mesh
from src.models.operators import HistoBasis
from src.models.params import JacobiParams
from src.models.stability import LogGrowthRecord, StabilityReport
from src.services.operators import OperatorBuilder, create_operator_builder
from src.services.spectral import singular_values
from src.utils.errors import ParameterError, SpectralError

logger = logging.getLogger(__name__)


def h_norm(mesh: Mesh, v: FloatArray) -> float:
    """||v||_h = sqrt(sum_i h_i v_i^2)."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (mesh.n_cells,):
        raise ParameterError(f"vector of shape {v.shape} does not match {mesh.n_cells} cells")
    return math.sqrt(float(mesh.widths @ (v * v)))


def op_norm_2_to_h(H: DenseMatrix, mesh: Mesh) -> float:  # noqa: N803
    """||H||_{2->h}, the largest singular value of D_h^{1/2} H."""
    if H.shape[0] != mesh.n_cells:
        raise ParameterError(f"H has {H.shape[0]} rows but the mesh has {mesh.n_cells} cells")
    svals = singular_values(np.sqrt(mesh.widths)[:, None] * H)
    return float(svals[0]) if svals.size else 0.0


def _lambda_max(gram: DenseMatrix) -> float:
    n = gram.shape[0]
    try:
        return float(scipy.linalg.eigvalsh(gram, subset_by_index=[n - 1, n - 1])[0])
    except scipy.linalg.LinAlgError as e:
        logger.error(f"Symmetric eigensolver failed at N={n}: {e}")
        raise SpectralError(f"eigenvalue computation failed: {e}") from e


class StabilityAnalyzer:
    """Checks ||H c||_h^2 <= c^T G c <= lambda_max(G) ||c||^2 and the log growth of lambda_max."""

    def __init__(
        self,
        builder: OperatorBuilder,
        trials: int = 200,
        seed: int = 0,
        psd_check_max_n: int = 512,
    ) -> None:
        """
        Initialize the StabilityAnalyzer.

        Args:
            builder: Operator builder for H and the Gram matrix
            trials: Random unit vectors tried per report
            seed: Seed of the trial generator
            psd_check_max_n: Largest N for the eigenvalue check of G - H^T D_h H
        """
        self.builder = builder
        self.trials = trials
        self.seed = seed
        self.psd_check_max_n = psd_check_max_n

    def lambda_max_gram(self, params: JacobiParams, N: int) -> float:  # noqa: N803
        """Largest eigenvalue of the N x N Gram matrix."""
        return _lambda_max(self.builder.build_gram(params, N))

    def verify_stability(
        self,
        params: JacobiParams,
        mesh: Mesh,
        trials: int | None = None,
        seed: int | None = None,
    ) -> StabilityReport:
        """Randomized and exact checks of the stability inequality at N = mesh.n_cells.

        Args:
            params: Jacobi parameters with alpha, beta > -1/2
            mesh: Partition of [-1, 1]
            trials: Number of unit-norm Gaussian vectors, defaults to the analyzer's
            seed: Seed of the trial generator, defaults to the analyzer's

        Returns:
            StabilityReport with margins, operator norm, lambda_max and growth ratios
        """
        trials = self.trials if trials is None else trials
        seed = self.seed if seed is None else seed
        n = mesh.n_cells
        H = self.builder.build_H(params, mesh, HistoBasis.STANDARD)  # noqa: N806
        gram = self.builder.build_gram(params, n)

        rng = np.random.default_rng(seed)
        c = rng.standard_normal((n, trials))
        c /= np.linalg.norm(c, axis=0)
        hc = H @ c
        margins = np.einsum("ij,ij->j", c, gram @ c) - mesh.widths @ (hc * hc)

        lam = _lambda_max(gram)
        trace = float(np.trace(gram))
        log_scale = 1.0 + math.log(n)
        psd_min = None
        if n <= self.psd_check_max_n:
            gap = gram - H.T @ (mesh.widths[:, None] * H)
            psd_min = float(scipy.linalg.eigvalsh(0.5 * (gap + gap.T))[0])

        report = StabilityReport(
            N=n,
            alpha=params.alpha,
            beta=params.beta,
            lambda_max_gram=lam,
            trace_gram=trace,
            log_bound_ratio=lam / log_scale,
            trace_log_ratio=trace / log_scale,
            op_norm_2_to_h=op_norm_2_to_h(H, mesh),
            inequality_margin=float(np.min(margins)) if trials > 0 else 0.0,
            psd_min_eigenvalue=psd_min,
            trials=trials,
            seed=seed,
        )
        logger.info(
            f"Stability at N={n}: lambda_max={lam:.6g}, margin={report.inequality_margin:.3e}, "
            f"op_norm={report.op_norm_2_to_h:.6g}"
        )
        return report

    def diag_gram_decay(self, params: JacobiParams, j_max: int) -> FloatArray:
        """d_j = int P_j^2 w^2 for j = 0..j_max."""
        if j_max < 0:
            raise ParameterError(f"j_max must be >= 0, got {j_max}")
        return self.builder.gram_diagonal(params, j_max + 1)

    def gram_trace_profile(self, params: JacobiParams, n_list: Sequence[int]) -> FloatArray:
        """trace(G_N) for every N in the list, from one diagonal pass."""
        if not n_list:
            return np.zeros(0, dtype=np.float64)
        traces = np.cumsum(self.builder.gram_diagonal(params, max(n_list)))
        return np.array([traces[n - 1] for n in n_list], dtype=np.float64)

    def log_growth_profile(
        self, params: JacobiParams, n_list: Sequence[int]
    ) -> list[LogGrowthRecord]:
        """lambda_max and trace of the leading Gram blocks, one Gram build at the largest N."""
        if not n_list:
            return []
        if min(n_list) < 1:
            raise ParameterError("sizes must be >= 1")
        gram = self.builder.build_gram(params, max(n_list))
        records = []
        for n in sorted(n_list):
            block = gram[:n, :n]
            lam = _lambda_max(block)
            trace = float(np.trace(block))
            log_scale = 1.0 + math.log(n)
            records.append(
                LogGrowthRecord(
                    N=n,
                    lambda_max=lam,
                    trace=trace,
                    log_bound_ratio=lam / log_scale,
                    trace_log_ratio=trace / log_scale,
                )
            )
            logger.debug(f"Gram block N={n}: lambda_max={lam:.6g}, trace={trace:.6g}")
        return records


def create_stability_analyzer() -> StabilityAnalyzer:
    """
    Create a StabilityAnalyzer instance using application settings.

    Returns:
        Configured StabilityAnalyzer instance
    """
    from src.config import get_settings

    settings = get_settings()
    return StabilityAnalyzer(
        builder=create_operator_builder(),
        trials=settings.stability_trials,
        seed=settings.default_seed,
        psd_check_max_n=settings.psd_check_max_n,
    )
