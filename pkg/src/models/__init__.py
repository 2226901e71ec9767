"""Pydantic data models for weighted Jacobi histopolation."""

from src.models.experiment import Command, ExperimentConfig, RunManifest
from src.models.mesh import Mesh, MeshMap, QuasiUniformReport
from src.models.operators import FactorizationReport, HistoBasis, LemmaReport, OperatorBundle
from src.models.params import CouplingCoeffs, JacobiParams, RecurrenceCoeffs
from src.models.quadrature import PanelRule, QuadratureRule
from src.models.reconstruct import Histopolant
from src.models.spectral import (
    DecayRecord,
    RearrangementComparison,
    ScalingSpec,
    SymbolSamples,
    ZeroDistributionReport,
)
from src.models.stability import LogGrowthRecord, StabilityReport

__all__ = [
    "JacobiParams",
    "RecurrenceCoeffs",
    "CouplingCoeffs",
    "QuadratureRule",
    "PanelRule",
    "Mesh",
    "MeshMap",
    "QuasiUniformReport",
    "HistoBasis",
    "OperatorBundle",
    "FactorizationReport",
    "LemmaReport",
    "ScalingSpec",
    "SymbolSamples",
    "RearrangementComparison",
    "DecayRecord",
    "ZeroDistributionReport",
    "StabilityReport",
    "LogGrowthRecord",
    "Histopolant",
    "Command",
    "ExperimentConfig",
    "RunManifest",
]
