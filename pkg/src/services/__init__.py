"""Service layer for weighted Jacobi histopolation."""

from src.services.experiments import ExperimentRunner, create_experiment_runner
from src.services.operators import OperatorBuilder, create_operator_builder
from src.services.quadrature import QuadratureService, create_quadrature_service
from src.services.reconstruct import HistopolationSolver, create_histopolation_solver
from src.services.stability import StabilityAnalyzer, create_stability_analyzer

__all__ = [
    "QuadratureService",
    "create_quadrature_service",
    "OperatorBuilder",
    "create_operator_builder",
    "StabilityAnalyzer",
    "create_stability_analyzer",
    "HistopolationSolver",
    "create_histopolation_solver",
    "ExperimentRunner",
    "create_experiment_runner",
]
