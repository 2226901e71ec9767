"""Custom exception classes for the histopolation library."""


class HistopolationError(Exception):
    """Base exception for all library errors."""

    pass


class ParameterError(HistopolationError):
    """Invalid Jacobi parameters, degrees or sizes."""

    pass


class DomainError(ParameterError):
    """Evaluation point outside [-1, 1]."""

    def __init__(self, t: float, message: str | None = None) -> None:
        self.t = t
        super().__init__(message or f"point {t!r} lies outside [-1, 1]")


class EndpointSingularityError(DomainError):
    """Weight evaluated at an endpoint where its exponent is negative."""

    def __init__(self, t: float, exponent: float) -> None:
        self.exponent = exponent
        super().__init__(t, f"weight is singular at t={t!r} (exponent {exponent!r} < 0)")


class IntegrabilityError(HistopolationError):
    """Weighted integrand is not integrable, or parameters leave the operation's regime."""

    pass


class QuadratureError(HistopolationError):
    """Quadrature did not converge."""

    def __init__(
        self, message: str, estimate: float | None = None, tol: float | None = None
    ) -> None:
        self.estimate = estimate
        self.tol = tol
        if estimate is not None and tol is not None:
            message = f"{message} (error estimate {estimate:.3e} > tol {tol:.3e})"
        super().__init__(message)


class MeshError(HistopolationError):
    """Invalid node set, grading map or mesh file."""

    pass


class SingularMatrixError(HistopolationError):
    """Histopolation matrix is numerically singular."""

    def __init__(self, condition: float, limit: float) -> None:
        self.condition = condition
        self.limit = limit
        super().__init__(f"condition estimate {condition:.3e} exceeds limit {limit:.3e}")


class SpectralError(HistopolationError):
    """Failures in singular value computations and symbol comparisons."""

    pass


class ConfigurationError(HistopolationError):
    """Experiment configuration rejected before any computation."""

    pass


class ExportError(HistopolationError):
    """Malformed matrix dump or unwritable output."""

    pass
