"""Mesh-related Pydantic models."""

from collections.abc import Callable
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.arrays import FloatArray, FloatArrayField

# Minimal separation between consecutive nodes.
MIN_NODE_SEPARATION = 1e-14


class MeshMap(BaseModel):
    """Grading map g: [0,1] -> [0,1] generating nodes x_i = -1 + 2 g(i/N)."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1)
    g: Callable[[FloatArray], FloatArray]
    g_prime: Optional[Callable[[FloatArray], FloatArray]] = None

    def derivative(self, y: FloatArray, step: float = 1e-6) -> FloatArray:
        """g'(y), in closed form when known, else by central differences."""
        y = np.asarray(y, dtype=np.float64)
        if self.g_prime is not None:
            return np.asarray(self.g_prime(y), dtype=np.float64)
        lo = np.clip(y - step, 0.0, 1.0)
        hi = np.clip(y + step, 0.0, 1.0)
        return np.asarray((self.g(hi) - self.g(lo)) / (hi - lo), dtype=np.float64)


class Mesh(BaseModel):
    """Partition -1 = x_0 < ... < x_N = 1 of the reference interval."""

    model_config = ConfigDict(frozen=True)

    nodes: FloatArrayField
    generator: Optional[MeshMap] = None

    @model_validator(mode="after")
    def check_nodes(self) -> "Mesh":
        """Validate endpoints and strict monotonicity."""
        x = self.nodes
        if x.ndim != 1 or x.shape[0] < 2:
            raise ValueError("a mesh needs at least two nodes")
        if x[0] != -1.0 or x[-1] != 1.0:
            raise ValueError("mesh endpoints must be exactly -1 and 1")
        if np.any(np.diff(x) <= MIN_NODE_SEPARATION):
            raise ValueError("mesh nodes must be strictly increasing")
        x.setflags(write=False)
        return self

    @property
    def n_cells(self) -> int:
        return int(self.nodes.shape[0] - 1)

    @property
    def widths(self) -> FloatArray:
        """Cell widths h_i = x_i - x_{i-1}, i = 1..N."""
        return np.diff(self.nodes)

    @property
    def name(self) -> str:
        return self.generator.name if self.generator is not None else "custom"


class QuasiUniformReport(BaseModel):
    """Constants c_h = N min h_i and C_h = N max h_i of a mesh."""

    model_config = ConfigDict(frozen=True)

    c_h: float
    C_h: float  # noqa: N815
    is_quasi_uniform_at_tolerance: bool

    @property
    def ratio(self) -> float:
        return self.C_h / self.c_h
