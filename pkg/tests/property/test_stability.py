"""Property-based tests for mesh-weighted norms and Gram-matrix stability bounds.

Feature: jacobi-histopolation
Properties 27-31: Stability
Validates: h_norm, op_norm_2_to_h, StabilityAnalyzer, log_growth_bounded
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.models.mesh import Mesh
from src.models.params import JacobiParams
from src.models.stability import LogGrowthRecord, log_growth_bounded
from src.services.mesh import build_mesh, graded_mesh, uniform_mesh
from src.services.operators import OperatorBuilder
from src.services.stability import StabilityAnalyzer, h_norm, op_norm_2_to_h
from src.utils.errors import IntegrabilityError, ParameterError

OMEGA_44_INTEGRAL = 2.0**9 * math.factorial(4) ** 2 / math.factorial(9)


class TestProperty27WeightedNorms:
    """Property 27: Mesh-Weighted Norms.

    *For any* mesh and vector, ||v||_h SHALL equal sqrt(sum h_i v_i^2) and
    ||H||_{2->h} SHALL equal the largest singular value of D_h^{1/2} H.

    **Validates: h_norm, op_norm_2_to_h**
    """

    def test_h_norm_examples(self) -> None:
        """Zero, constant and two-cell vectors."""
        mesh = graded_mesh(10, "exp")
        assert h_norm(mesh, np.zeros(10)) == 0.0
        assert h_norm(mesh, np.ones(10)) == pytest.approx(math.sqrt(2.0), rel=1e-14)
        two_cells = h_norm(uniform_mesh(2), np.array([1.0, 2.0]))
        assert two_cells == pytest.approx(math.sqrt(5.0), rel=1e-15)

    def test_h_norm_rejects_mismatch(self) -> None:
        """Vector length must equal the number of cells."""
        with pytest.raises(ParameterError):
            h_norm(uniform_mesh(3), np.ones(4))

    def test_op_norm_examples(self) -> None:
        """Zero and identity matrices."""
        mesh = uniform_mesh(8)
        assert op_norm_2_to_h(np.zeros((8, 8)), mesh) == 0.0
        assert op_norm_2_to_h(np.eye(8), mesh) == pytest.approx(math.sqrt(2.0 / 8), rel=1e-14)
        with pytest.raises(ParameterError):
            op_norm_2_to_h(np.eye(7), mesh)

    @settings(max_examples=30, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=10_000),
        n=st.integers(min_value=1, max_value=20),
    )
    def test_rank_one(self, seed: int, n: int) -> None:
        """||u v^T||_{2->h} = ||u||_h ||v||_2."""
        rng = np.random.default_rng(seed)
        mesh = graded_mesh(n, "square")
        u = rng.standard_normal(n)
        v = rng.standard_normal(n)
        expected = h_norm(mesh, u) * float(np.linalg.norm(v))
        assert op_norm_2_to_h(np.outer(u, v), mesh) == pytest.approx(expected, rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000))
    def test_norm_bounds_every_vector(self, seed: int) -> None:
        """||H c||_h <= ||H||_{2->h} ||c|| for random H and c."""
        rng = np.random.default_rng(seed)
        mesh = graded_mesh(12, "exp")
        H = rng.standard_normal((12, 12))  # noqa: N806
        c = rng.standard_normal(12)
        bound = op_norm_2_to_h(H, mesh) * float(np.linalg.norm(c))
        assert h_norm(mesh, H @ c) <= bound * (1.0 + 1e-12)


class TestProperty28GramDiagonal:
    """Property 28: Gram Diagonal Decay.

    *For any* admissible (alpha, beta), d_j = int P_j^2 w^2 SHALL be positive
    and decay like 1/j, and the trace profile SHALL equal the Gram traces.

    **Validates: lambda_max_gram, diag_gram_decay, gram_trace_profile**
    """

    def test_single_polynomial(
        self, analyzer: StabilityAnalyzer, params_symmetric: JacobiParams
    ) -> None:
        """lambda_max(G_1) is the integral of w_{4,4}."""
        lam = analyzer.lambda_max_gram(params_symmetric, 1)
        assert lam == pytest.approx(OMEGA_44_INTEGRAL, rel=1e-13)
        assert OMEGA_44_INTEGRAL == pytest.approx(0.812698, abs=1e-6)

    def test_legendre_diagonal(self, analyzer: StabilityAnalyzer) -> None:
        """For alpha = beta = 0, (j + 1) d_j = 2(j + 1)/(2j + 1) lies in (1, 2]."""
        d = analyzer.diag_gram_decay(JacobiParams(alpha=0.0, beta=0.0), 200)
        j = np.arange(201)
        np.testing.assert_allclose(d, 2.0 / (2.0 * j + 1.0), rtol=1e-12)
        scaled = (j + 1) * d
        assert np.all(scaled > 1.0) and np.all(scaled <= 2.0 + 1e-12)

    def test_symmetric_decay(
        self, analyzer: StabilityAnalyzer, params_symmetric: JacobiParams
    ) -> None:
        """For alpha = beta = 2, j d_j settles near 6."""
        d = analyzer.diag_gram_decay(params_symmetric, 500)
        assert np.all(d > 0.0)
        scaled = (np.arange(501) + 1.0) * d
        assert np.all(scaled[50:] > 5.0) and np.all(scaled[50:] < 7.0)

    @pytest.mark.parametrize(
        "params", [JacobiParams(alpha=2.0, beta=2.0), JacobiParams(alpha=1.0, beta=3.0)], ids=str
    )
    def test_trace_profile(
        self, analyzer: StabilityAnalyzer, builder: OperatorBuilder, params: JacobiParams
    ) -> None:
        """One diagonal pass reproduces the trace of every leading Gram matrix."""
        sizes = [4, 16, 40]
        traces = analyzer.gram_trace_profile(params, sizes)
        expected = [float(np.trace(builder.build_gram(params, n))) for n in sizes]
        np.testing.assert_allclose(traces, expected, rtol=1e-12)
        assert analyzer.gram_trace_profile(params, []).shape == (0,)

    def test_rejects(self, analyzer: StabilityAnalyzer) -> None:
        """Negative j_max and weights with non-integrable squares are refused."""
        with pytest.raises(ParameterError):
            analyzer.diag_gram_decay(JacobiParams(alpha=1.0, beta=1.0), -1)
        with pytest.raises(IntegrabilityError):
            analyzer.diag_gram_decay(JacobiParams(alpha=-0.5, beta=0.0), 10)


class TestProperty29StabilityInequality:
    """Property 29: Stability Inequality.

    *For any* admissible (alpha, beta) and mesh, ||H c||_h^2 <= c^T G c <=
    lambda_max(G) ||c||^2 SHALL hold for every tested c, and G - H^T D_h H
    SHALL be positive semidefinite.

    **Validates: verify_stability**
    """

    @pytest.mark.parametrize("n", [16, 64, 128])
    @pytest.mark.parametrize("mesh_kind", ["uniform", "exp", "square"])
    @pytest.mark.parametrize(
        "params", [JacobiParams(alpha=2.0, beta=2.0), JacobiParams(alpha=0.6, beta=0.8)], ids=str
    )
    def test_sweep(
        self, analyzer: StabilityAnalyzer, params: JacobiParams, mesh_kind: str, n: int
    ) -> None:
        """Every inequality holds on the standard sweep."""
        report = analyzer.verify_stability(params, build_mesh(mesh_kind, n))
        assert report.holds(1e-8)
        assert report.N == n
        assert report.trials == 100 and report.seed == 7
        assert report.psd_min_eigenvalue is not None
        assert report.op_norm_2_to_h <= math.sqrt(report.lambda_max_gram) + 1e-8
        assert report.lambda_max_gram <= report.trace_gram + 1e-12

    def test_seed_override_is_reproducible(
        self, analyzer: StabilityAnalyzer, params_asymmetric: JacobiParams
    ) -> None:
        """Equal seeds give equal reports; the override is recorded."""
        mesh = uniform_mesh(12)
        first = analyzer.verify_stability(params_asymmetric, mesh, trials=20, seed=11)
        second = analyzer.verify_stability(params_asymmetric, mesh, trials=20, seed=11)
        assert first == second
        assert first.seed == 11 and first.trials == 20

    def test_psd_check_skipped_above_limit(
        self, builder: OperatorBuilder, params_symmetric: JacobiParams
    ) -> None:
        """No eigenvalue check of G - H^T D_h H above psd_check_max_n."""
        small = StabilityAnalyzer(builder, trials=10, seed=0, psd_check_max_n=8)
        report = small.verify_stability(params_symmetric, uniform_mesh(16))
        assert report.psd_min_eigenvalue is None
        assert report.holds()

    def test_holds_flags_violations(self) -> None:
        """A negative margin beyond tolerance fails the check."""
        from src.models.stability import StabilityReport

        report = StabilityReport(
            N=4,
            alpha=1.0,
            beta=1.0,
            lambda_max_gram=1.0,
            trace_gram=2.0,
            log_bound_ratio=0.5,
            trace_log_ratio=1.0,
            op_norm_2_to_h=0.5,
            inequality_margin=-1e-3,
            trials=10,
            seed=0,
        )
        assert not report.holds(1e-8)
        assert report.holds(1e-2)

    @pytest.mark.parametrize("mesh_kind", ["uniform", "exp"])
    def test_negative_exponent_in_regime(self, analyzer: StabilityAnalyzer, mesh_kind: str) -> None:
        """-1/2 < alpha < 0 is inside the regime and every inequality holds."""
        report = analyzer.verify_stability(
            JacobiParams(alpha=-0.3, beta=0.4), build_mesh(mesh_kind, 16)
        )
        assert math.isfinite(report.lambda_max_gram)
        assert math.isfinite(report.op_norm_2_to_h)
        assert report.psd_min_eigenvalue is not None
        assert report.holds(1e-8)

    def test_rejects_low_exponents(self, analyzer: StabilityAnalyzer) -> None:
        """alpha <= -1/2 is outside the stability regime."""
        with pytest.raises(IntegrabilityError):
            analyzer.verify_stability(JacobiParams(alpha=-0.6, beta=0.0), uniform_mesh(8))


class TestProperty30LogGrowth:
    """Property 30: Logarithmic Growth.

    *For any* admissible (alpha, beta), lambda_max(G_N) / (1 + log N) SHALL stay
    bounded over the requested sizes.

    **Validates: log_growth_profile, log_growth_bounded**
    """

    @pytest.mark.parametrize(
        "params", [JacobiParams(alpha=2.0, beta=2.0), JacobiParams(alpha=0.6, beta=0.8)], ids=str
    )
    def test_profile_is_bounded(self, analyzer: StabilityAnalyzer, params: JacobiParams) -> None:
        """Ratios at N = 16, 64, 256 stay within 1.5 times the first."""
        records = analyzer.log_growth_profile(params, [64, 16, 256])
        assert [r.N for r in records] == [16, 64, 256]
        assert log_growth_bounded(records, slack=1.5)
        for r in records:
            assert r.lambda_max <= r.trace + 1e-12
            expected = r.lambda_max / (1.0 + math.log(r.N))
            assert r.log_bound_ratio == pytest.approx(expected, rel=1e-15)

    def test_profile_matches_direct_builds(
        self, analyzer: StabilityAnalyzer, params_symmetric: JacobiParams
    ) -> None:
        """Leading blocks of the largest Gram matrix give the smaller lambda_max."""
        records = analyzer.log_growth_profile(params_symmetric, [8, 24])
        direct = analyzer.lambda_max_gram(params_symmetric, 8)
        assert records[0].lambda_max == pytest.approx(direct, rel=1e-12)

    def test_profile_edge_cases(
        self, analyzer: StabilityAnalyzer, params_symmetric: JacobiParams
    ) -> None:
        """Empty lists give no records; sizes below one are refused."""
        assert analyzer.log_growth_profile(params_symmetric, []) == []
        with pytest.raises(ParameterError):
            analyzer.log_growth_profile(params_symmetric, [0, 4])

    @staticmethod
    def _record(n: int, ratio: float) -> LogGrowthRecord:
        scale = 1.0 + math.log(n)
        return LogGrowthRecord(
            N=n,
            lambda_max=ratio * scale,
            trace=2.0 * ratio * scale,
            log_bound_ratio=ratio,
            trace_log_ratio=2.0 * ratio,
        )

    def test_bounded_verdicts(self) -> None:
        """Ratios are compared against the one at N = 16."""
        assert log_growth_bounded([])
        assert log_growth_bounded([self._record(16, 1.0), self._record(64, 1.4)])
        assert not log_growth_bounded([self._record(64, 1.6), self._record(16, 1.0)])
        assert log_growth_bounded([self._record(16, 1.0), self._record(64, 1.6)], slack=2.0)

    def test_sizes_below_calibration_are_ignored(self) -> None:
        """Records with N < 16 neither set nor break the reference ratio."""
        records = [self._record(8, 5.0), self._record(16, 1.0), self._record(64, 1.2)]
        assert log_growth_bounded(records)
        assert log_growth_bounded([self._record(8, 0.5), self._record(16, 1.0)], slack=1.0)

    def test_calibration_size_is_required(self) -> None:
        """Without a record at the calibration size there is no reference."""
        with pytest.raises(ParameterError):
            log_growth_bounded([self._record(8, 1.0), self._record(32, 1.0)])
        assert log_growth_bounded([self._record(8, 1.0), self._record(32, 1.4)], calibration_n=8)

    @pytest.mark.slow
    def test_growth_up_to_2048(
        self, analyzer: StabilityAnalyzer, params_symmetric: JacobiParams
    ) -> None:
        """lambda_max / (1 + log N) stays within 1.5 times its N = 16 value up to N = 2048."""
        sizes = [16, 64, 256, 1024, 2048]
        records = analyzer.log_growth_profile(params_symmetric, sizes)
        assert [r.N for r in records] == sizes
        assert log_growth_bounded(records, slack=1.5, calibration_n=16)
        lam = [r.lambda_max for r in records]
        assert all(a <= b + 1e-12 for a, b in zip(lam, lam[1:]))


def _mesh_strategy() -> st.SearchStrategy[Mesh]:
    return st.builds(build_mesh, st.sampled_from(["uniform", "exp", "square"]), st.integers(4, 24))


class TestProperty31RandomMeshStability:
    """Property 31: Stability on Random Meshes.

    *For any* grading and small N, the randomized margin SHALL be nonnegative.

    **Validates: verify_stability**
    """

    @settings(max_examples=15, deadline=None)
    @given(mesh=_mesh_strategy())
    def test_margin_nonnegative(
        self, analyzer: StabilityAnalyzer, params_fractional: JacobiParams, mesh: Mesh
    ) -> None:
        """c^T G c - ||H c||_h^2 >= 0 up to rounding."""
        report = analyzer.verify_stability(params_fractional, mesh, trials=25)
        assert report.inequality_margin >= -1e-10
