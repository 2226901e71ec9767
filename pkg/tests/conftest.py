"""Pytest fixtures for histopolation tests."""

import pytest

from src.models.mesh import Mesh
from src.models.params import JacobiParams
from src.services.mesh import graded_mesh, uniform_mesh
from src.services.operators import OperatorBuilder
from src.services.quadrature import QuadratureService
from src.services.reconstruct import HistopolationSolver
from src.services.stability import StabilityAnalyzer

# Session scope keeps hypothesis tests free of function-scoped fixtures.


@pytest.fixture(scope="session")
def params_symmetric() -> JacobiParams:
    """Symmetric weight (1 - t^2)^2."""
    return JacobiParams(alpha=2.0, beta=2.0)


@pytest.fixture(scope="session")
def params_asymmetric() -> JacobiParams:
    """Asymmetric weight with delta = 1/2."""
    return JacobiParams(alpha=1.5, beta=1.0)


@pytest.fixture(scope="session")
def params_fractional() -> JacobiParams:
    """Weight with non-integer exponents below one."""
    return JacobiParams(alpha=0.6, beta=0.8)


@pytest.fixture(scope="session")
def quadrature() -> QuadratureService:
    """Quadrature service with the default orders and tolerance."""
    return QuadratureService(order=32, check_order=48, tol=1e-11)


@pytest.fixture(scope="session")
def builder(quadrature: QuadratureService) -> OperatorBuilder:
    """Operator builder on the default quadrature service."""
    return OperatorBuilder(quadrature=quadrature)


@pytest.fixture(scope="session")
def analyzer(builder: OperatorBuilder) -> StabilityAnalyzer:
    """Stability analyzer with a fixed seed."""
    return StabilityAnalyzer(builder=builder, trials=100, seed=7, psd_check_max_n=256)


@pytest.fixture(scope="session")
def solver(builder: OperatorBuilder) -> HistopolationSolver:
    """Histopolation solver with the default condition limit."""
    return HistopolationSolver(builder=builder, condition_limit=1e14)


@pytest.fixture(scope="session")
def meshes_64() -> dict[str, Mesh]:
    """Uniform, exp and square meshes with 64 cells."""
    return {
        "uniform": uniform_mesh(64),
        "exp": graded_mesh(64, "exp"),
        "square": graded_mesh(64, "square"),
    }
