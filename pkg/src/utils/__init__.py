"""Utility modules for the histopolation library."""

from src.utils.errors import (
    ConfigurationError,
    DomainError,
    EndpointSingularityError,
    ExportError,
    HistopolationError,
    IntegrabilityError,
    MeshError,
    ParameterError,
    QuadratureError,
    SingularMatrixError,
    SpectralError,
)

__all__ = [
    "HistopolationError",
    "ParameterError",
    "DomainError",
    "EndpointSingularityError",
    "IntegrabilityError",
    "QuadratureError",
    "MeshError",
    "SingularMatrixError",
    "SpectralError",
    "ConfigurationError",
    "ExportError",
]
