"""Quadrature rule models."""

import numpy as np
import scipy.sparse as sps
from pydantic import BaseModel, ConfigDict, model_validator

from src.models.arrays import FloatArray, FloatArrayField, IntArrayField


class QuadratureRule(BaseModel):
    """Gauss-Legendre rule on the reference interval [-1, 1]."""

    model_config = ConfigDict(frozen=True)

    nodes: FloatArrayField
    weights: FloatArrayField
    order: int

    @model_validator(mode="after")
    def check_shape(self) -> "QuadratureRule":
        """Validate that nodes and weights match the order."""
        if self.nodes.shape != (self.order,) or self.weights.shape != (self.order,):
            raise ValueError("nodes and weights must both have length `order`")
        return self

    def mapped(self, a: float, b: float) -> tuple[FloatArray, FloatArray]:
        """Nodes and weights of the affine image of the rule on [a, b]."""
        half = 0.5 * (b - a)
        return 0.5 * (a + b) + half * self.nodes, half * self.weights


class PanelRule(BaseModel):
    """Composite rule over the cells of a partition.

    Every quadrature point belongs to exactly one cell; `cell_index[k]` is the
    0-based cell of `points[k]`. Weights carry the panel Jacobian times the
    Jacobi weight of the exponents the rule was built for, so cell sums of a
    function g approximate the weighted cell integrals of g.
    """

    model_config = ConfigDict(frozen=True)

    points: FloatArrayField
    weights: FloatArrayField
    cell_index: IntArrayField
    n_cells: int
    n_panels: int

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def aggregation_matrix(self, scale: FloatArray | None = None) -> sps.csc_matrix:
        """Sparse (n_cells x n_points) matrix summing weighted values per cell."""
        data = self.weights if scale is None else self.weights * scale
        cols = np.arange(self.size)
        return sps.csc_matrix((data, (self.cell_index, cols)), shape=(self.n_cells, self.size))

    def sum_by_cell(self, values: FloatArray) -> FloatArray:
        """Cell-wise quadrature sums of point values."""
        return np.bincount(
            self.cell_index, weights=self.weights * values, minlength=self.n_cells
        ).astype(np.float64)
