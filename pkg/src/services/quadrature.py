"""Gauss-Legendre rules and graded-panel integration of Jacobi-weighted integrands."""

import logging
import math
from collections.abc import Callable
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from src.models.arrays import FloatArray
from src.models.params import JacobiParams
from src.models.quadrature import PanelRule, QuadratureRule
from src.services.jacobi import weight_values
from src.utils.errors import IntegrabilityError, ParameterError, QuadratureError

logger = logging.getLogger(__name__)

Integrand = Callable[[FloatArray], FloatArray]

MAX_RULE_ORDER = 10_000
# Graded breakpoints stay at least this far from the endpoint they approach.
GRADING_FLOOR = 2.0**20 * float(np.finfo(np.float64).eps)
# Panels narrower than this many ulps of their endpoints are not split again.
_MIN_PANEL_ULPS = 1024


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [-1, 1].

    Rules are cached by order; the cache is safe for concurrent readers.

    Raises:
        ParameterError: If n is outside 1..10^4
    """
    if not 1 <= n <= MAX_RULE_ORDER:
        raise ParameterError(f"rule order must lie in 1..{MAX_RULE_ORDER}, got {n}")
    if n == 1:
        return _frozen_rule(np.array([0.0]), np.array([2.0]), 1)
    x, w = roots_legendre(n)
    # exact symmetry about 0
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return _frozen_rule(x, w, n)


@lru_cache(maxsize=64)
def gauss_jacobi(n: int, a: float, b: float) -> QuadratureRule:
    """n-point Gauss rule for the weight (1-s)^a (1+s)^b on [-1, 1].

    Raises:
        ParameterError: If n is outside 1..10^4 or an exponent is <= -1
    """
    if not 1 <= n <= MAX_RULE_ORDER:
        raise ParameterError(f"rule order must lie in 1..{MAX_RULE_ORDER}, got {n}")
    if a <= -1.0 or b <= -1.0:
        raise ParameterError(f"Gauss-Jacobi exponents must exceed -1, got ({a}, {b})")
    x, w = roots_jacobi(n, a, b)
    return _frozen_rule(np.asarray(x, dtype=np.float64), np.asarray(w, dtype=np.float64), n)


def _frozen_rule(nodes: FloatArray, weights: FloatArray, order: int) -> QuadratureRule:
    rule = QuadratureRule(nodes=nodes, weights=weights, order=order)
    rule.nodes.setflags(write=False)
    rule.weights.setflags(write=False)
    return rule


def _evaluate(f: Integrand, t: FloatArray) -> FloatArray:
    values = np.asarray(f(t), dtype=np.float64)
    if values.shape != t.shape:
        values = np.broadcast_to(values, t.shape)
    return values


def integrate_cell(f: Integrand, a: float, b: float, order: int) -> float:
    """Gauss-Legendre approximation of the integral of f over [a, b]."""
    if not a < b:
        raise ParameterError(f"integration interval needs a < b, got [{a}, {b}]")
    t, w = gauss_legendre(order).mapped(a, b)
    return float(np.dot(w, _evaluate(f, t)))


def needs_grading(exponent: float) -> bool:
    """True when (1 -+ t)^exponent is not a polynomial factor at its endpoint."""
    return exponent < 0.0 or abs(exponent - round(exponent)) > 1e-12


def weighted_panels(
    lo: FloatArray,
    hi: FloatArray,
    order: int,
    exponents: tuple[float, float],
    singular_left: bool,
    singular_right: bool,
) -> tuple[FloatArray, FloatArray]:
    """Points and weights of (1-t)^a (1+t)^b dt on every panel, shape (n_panels, order).

    A panel that starts at -1 with `singular_left`, or ends at 1 with
    `singular_right`, uses a Gauss-Jacobi rule for that endpoint factor. The
    factor is then taken from the panel-local coordinate and is never evaluated
    at a node that rounds onto the endpoint.
    """
    ea, eb = exponents
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    at_left = (lo == -1.0) & singular_left
    at_right = (hi == 1.0) & singular_right
    regular = ~(at_left | at_right)

    legendre = gauss_legendre(order)
    points = mid[:, None] + half[:, None] * legendre.nodes[None, :]
    weights = np.empty_like(points)
    scale = half[regular][:, None] * legendre.weights[None, :]
    weights[regular] = scale * weight_values(exponents, points[regular])
    for i in np.flatnonzero(~regular):
        left, right = bool(at_left[i]), bool(at_right[i])
        jacobi = gauss_jacobi(order, ea if right else 0.0, eb if left else 0.0)
        t = mid[i] + half[i] * jacobi.nodes
        w = half[i] * jacobi.weights
        w = w * (half[i] ** ea if right else np.power(1.0 - t, ea))
        w = w * (half[i] ** eb if left else np.power(1.0 + t, eb))
        points[i] = t
        weights[i] = w
    return points, weights


class QuadratureService:
    """Weighted integration with geometric panel grading toward singular endpoints."""

    def __init__(
        self,
        order: int = 32,
        check_order: int = 48,
        tol: float = 1e-11,
        grading_ratio: float = 0.25,
        grading_levels_max: int = 40,
        panel_budget: int = 512,
        phase_budget_factor: float = 0.125,
    ) -> None:
        """
        Initialize the QuadratureService.

        Args:
            order: Per-panel Gauss-Legendre order
            check_order: Higher order used for the per-panel error estimate
            tol: Default absolute tolerance
            grading_ratio: Geometric ratio of graded panels toward an endpoint
            grading_levels_max: Maximum number of graded levels per endpoint
            panel_budget: Maximum number of panels in adaptive integration
            phase_budget_factor: Max Jacobi phase per panel as a multiple of pi * order
        """
        if check_order <= order:
            raise ParameterError("check_order must exceed order")
        if not 0.0 < grading_ratio < 1.0:
            raise ParameterError("grading_ratio must lie in (0, 1)")
        self.order = order
        self.check_order = check_order
        self.tol = tol
        self.grading_ratio = grading_ratio
        self.grading_levels_max = grading_levels_max
        self.panel_budget = panel_budget
        self.phase_budget = phase_budget_factor * math.pi * order

    # ------------------------------------------------------------------ grading

    def grading_levels(self, width: float, exponent: float) -> int:
        """Graded levels so the innermost panel carries mass below the tolerance."""
        p = exponent + 1.0
        tau = self.tol
        need = (math.log(width) - math.log(tau) / p) / math.log(1.0 / self.grading_ratio)
        levels = max(2, math.ceil(need))
        if levels > self.grading_levels_max:
            logger.warning(
                f"Grading toward an endpoint with exponent {exponent:g} capped at "
                f"{self.grading_levels_max} levels (wanted {levels})"
            )
            levels = self.grading_levels_max
        return levels

    def graded_breakpoints(
        self,
        lo: float,
        hi: float,
        left_exponent: float | None = None,
        right_exponent: float | None = None,
    ) -> FloatArray:
        """Ascending breakpoints of [lo, hi], graded toward the ends given an exponent.

        Graded steps shorter than GRADING_FLOOR are dropped, so every breakpoint
        except the two ends lies strictly inside (lo, hi).
        """
        if left_exponent is not None and right_exponent is not None:
            mid = 0.5 * (lo + hi)
            left = self.graded_breakpoints(lo, mid, left_exponent=left_exponent)
            right = self.graded_breakpoints(mid, hi, right_exponent=right_exponent)
            return np.concatenate([left, right[1:]])
        width = hi - lo
        if left_exponent is not None:
            steps = self._graded_steps(width, left_exponent)[::-1]
            return np.concatenate([[lo], lo + steps, [hi]])
        if right_exponent is not None:
            steps = self._graded_steps(width, right_exponent)
            return np.concatenate([[lo], hi - steps, [hi]])
        return np.array([lo, hi])

    def _graded_steps(self, width: float, exponent: float) -> FloatArray:
        """Descending distances width * ratio^k from the graded end, k = 1..levels."""
        levels = self.grading_levels(width, exponent)
        steps = width * self.grading_ratio ** np.arange(1, levels + 1, dtype=np.float64)
        kept = steps[steps >= GRADING_FLOOR]
        if kept.shape[0] < levels:
            logger.debug(
                f"Grading over width {width:g} stopped after {kept.shape[0]} of {levels} levels"
            )
        return kept

    def _phase_split(self, lo: float, hi: float, max_degree: int) -> FloatArray:
        """Breakpoints equispaced in arccos so each panel carries bounded Jacobi phase."""
        th_lo = math.acos(min(1.0, max(-1.0, lo)))
        th_hi = math.acos(min(1.0, max(-1.0, hi)))
        k = max(1, math.ceil(max_degree * (th_lo - th_hi) / self.phase_budget))
        if k == 1:
            return np.array([lo, hi])
        inner = np.cos(np.linspace(th_lo, th_hi, k + 1))
        inner[0], inner[-1] = lo, hi
        return inner

    # ------------------------------------------------------------- panel rules

    @staticmethod
    def _check_integrable(exponents: tuple[float, float], a: float, b: float) -> None:
        ea, eb = exponents
        if a == -1.0 and eb <= -1.0:
            raise IntegrabilityError(f"(1+t)^{eb:g} is not integrable at t=-1")
        if b == 1.0 and ea <= -1.0:
            raise IntegrabilityError(f"(1-t)^{ea:g} is not integrable at t=1")

    def panel_rule(
        self, nodes: FloatArray, exponents: tuple[float, float], max_degree: int
    ) -> PanelRule:
        """Composite rule for the weighted integrals over the cells [x_{i-1}, x_i].

        Args:
            nodes: Ascending breakpoints, first -1 and last 1 for a full mesh
            exponents: (a, b) of the weight (1-t)^a (1+t)^b carried by the rule weights
            max_degree: Largest polynomial degree the rule must resolve

        Returns:
            PanelRule with panels graded toward singular endpoints and split by phase
        """
        nodes = np.asarray(nodes, dtype=np.float64)
        n_cells = nodes.shape[0] - 1
        self._check_integrable(exponents, float(nodes[0]), float(nodes[-1]))
        ea, eb = exponents
        grade_left = bool(nodes[0] == -1.0 and needs_grading(eb))
        grade_right = bool(nodes[-1] == 1.0 and needs_grading(ea))

        theta = np.arccos(np.clip(nodes, -1.0, 1.0))
        splits = np.maximum(
            1, np.ceil(max(max_degree, 0) * (theta[:-1] - theta[1:]) / self.phase_budget)
        ).astype(np.int64)
        special = splits > 1
        if grade_left:
            special[0] = True
        if grade_right:
            special[-1] = True

        lows: list[FloatArray] = [nodes[:-1][~special]]
        highs: list[FloatArray] = [nodes[1:][~special]]
        cells: list[FloatArray] = [np.flatnonzero(~special)]
        for i in np.flatnonzero(special):
            lo, hi = float(nodes[i]), float(nodes[i + 1])
            graded = self.graded_breakpoints(
                lo,
                hi,
                left_exponent=eb if (i == 0 and grade_left) else None,
                right_exponent=ea if (i == n_cells - 1 and grade_right) else None,
            )
            bps = np.concatenate(
                [self._phase_split(p, q, max_degree)[:-1] for p, q in zip(graded[:-1], graded[1:])]
                + [graded[-1:]]
            )
            lows.append(bps[:-1])
            highs.append(bps[1:])
            cells.append(np.full(bps.shape[0] - 1, i))

        lo_all = np.concatenate(lows)
        hi_all = np.concatenate(highs)
        cell_all = np.concatenate(cells).astype(np.int64)
        order = np.lexsort((lo_all, cell_all))
        lo_all, hi_all, cell_all = lo_all[order], hi_all[order], cell_all[order]

        points, weights = weighted_panels(
            lo_all, hi_all, self.order, exponents, grade_left, grade_right
        )
        return PanelRule(
            points=points.reshape(-1),
            weights=weights.reshape(-1),
            cell_index=np.repeat(cell_all, self.order),
            n_cells=n_cells,
            n_panels=int(lo_all.shape[0]),
        )

    def interval_rule(self, exponents: tuple[float, float], max_degree: int) -> PanelRule:
        """Single-cell rule on [-1, 1] for degree-`max_degree` polynomials times the weight.

        Polynomial weights get one Gauss-Legendre rule exact for the whole product.
        """
        ea, eb = exponents
        if not needs_grading(ea) and not needs_grading(eb):
            n = (max(max_degree, 0) + int(round(ea)) + int(round(eb))) // 2 + 1
            if n <= MAX_RULE_ORDER:
                rule = gauss_legendre(max(n, self.order))
                return PanelRule(
                    points=rule.nodes,
                    weights=rule.weights * weight_values(exponents, rule.nodes),
                    cell_index=np.zeros(rule.order, dtype=np.int64),
                    n_cells=1,
                    n_panels=1,
                )
        return self.panel_rule(np.array([-1.0, 1.0]), exponents, max_degree)

    # ------------------------------------------------------ adaptive integration

    def integrate_exponents(
        self,
        f: Integrand,
        exponents: tuple[float, float],
        a: float,
        b: float,
        tol: float | None = None,
    ) -> tuple[float, float]:
        """Integral of f (1-t)^ea (1+t)^eb over [a, b] with an error estimate.

        Raises:
            IntegrabilityError: If an exponent <= -1 sits at a touched endpoint
            QuadratureError: If the integrand is not finite on a panel, or the
                tolerance is not reached before the panel budget runs out or no
                panel can be split further
        """
        tol = self.tol if tol is None else tol
        if not -1.0 <= a < b <= 1.0:
            raise ParameterError(
                f"integration interval must satisfy -1 <= a < b <= 1, got [{a}, {b}]"
            )
        self._check_integrable(exponents, a, b)
        ea, eb = exponents
        left = eb if (a == -1.0 and needs_grading(eb)) else None
        right = ea if (b == 1.0 and needs_grading(ea)) else None
        bps = self.graded_breakpoints(a, b, left_exponent=left, right_exponent=right)
        lo, hi = bps[:-1], bps[1:]
        graded = (left is not None, right is not None)

        while True:
            q_low = self._panel_sums(f, exponents, self.order, lo, hi, *graded)
            q_high = self._panel_sums(f, exponents, self.check_order, lo, hi, *graded)
            errors = np.abs(q_high - q_low)
            estimate = float(np.sum(errors))
            if not math.isfinite(estimate):
                raise QuadratureError(
                    f"weighted integrand on [{a}, {b}] is not finite at a quadrature point"
                )
            if estimate <= tol:
                return float(np.sum(q_high)), estimate
            if lo.shape[0] >= self.panel_budget:
                raise QuadratureError(
                    f"weighted integral on [{a}, {b}] did not converge in {lo.shape[0]} panels",
                    estimate=estimate,
                    tol=tol,
                )
            # refine panels with above-average error; independent of tol
            ulps = np.spacing(np.maximum(np.abs(lo), np.abs(hi)))
            splittable = (hi - lo) * min(self.grading_ratio, 0.5) >= _MIN_PANEL_ULPS * ulps
            refine = (errors >= estimate / lo.shape[0]) & splittable
            if not np.any(refine):
                raise QuadratureError(
                    f"weighted integral on [{a}, {b}] stalled: no panel can be split further",
                    estimate=estimate,
                    tol=tol,
                )
            cut = 0.5 * (lo + hi)
            if left is not None:
                cut = np.where(lo == -1.0, lo + self.grading_ratio * (hi - lo), cut)
            if right is not None:
                cut = np.where(hi == 1.0, hi - self.grading_ratio * (hi - lo), cut)
            lo, hi = (
                np.concatenate([lo[~refine], lo[refine], cut[refine]]),
                np.concatenate([hi[~refine], cut[refine], hi[refine]]),
            )
            order = np.argsort(lo)
            lo, hi = lo[order], hi[order]

    @staticmethod
    def _panel_sums(
        f: Integrand,
        exponents: tuple[float, float],
        order: int,
        lo: FloatArray,
        hi: FloatArray,
        singular_left: bool,
        singular_right: bool,
    ) -> FloatArray:
        points, weights = weighted_panels(lo, hi, order, exponents, singular_left, singular_right)
        values = _evaluate(f, points.reshape(-1)).reshape(points.shape)
        return np.sum(weights * values, axis=1)

    def integrate_weighted_with_error(
        self,
        f: Integrand,
        params: JacobiParams,
        a: float,
        b: float,
        tol: float | None = None,
    ) -> tuple[float, float]:
        """Integral of f w_{alpha,beta} over [a, b] and its error estimate."""
        return self.integrate_exponents(f, params.exponents, a, b, tol)

    def integrate_weighted(
        self,
        f: Integrand,
        params: JacobiParams,
        a: float,
        b: float,
        tol: float | None = None,
    ) -> float:
        """Integral of f w_{alpha,beta} over [a, b] within the tolerance."""
        return self.integrate_exponents(f, params.exponents, a, b, tol)[0]


def create_quadrature_service() -> QuadratureService:
    """
    Create a QuadratureService instance using application settings.

    Returns:
        Configured QuadratureService instance
    """
    from src.config import get_settings

    settings = get_settings()
    return QuadratureService(
        order=settings.quadrature_order,
        check_order=settings.quadrature_check_order,
        tol=settings.quadrature_tol,
        grading_ratio=settings.grading_ratio,
        grading_levels_max=settings.grading_levels_max,
        panel_budget=settings.panel_budget,
        phase_budget_factor=settings.phase_budget_factor,
    )
