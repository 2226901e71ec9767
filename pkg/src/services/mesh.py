"""Partitions of [-1, 1]: uniform, map-graded, tabulated, and their diagnostics."""

import logging
import math
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import ValidationError

from src.models.arrays import DenseMatrix, FloatArray
from src.models.mesh import MIN_NODE_SEPARATION, Mesh, MeshMap, QuasiUniformReport
from src.utils.errors import MeshError, ParameterError

logger = logging.getLogger(__name__)

_E = math.e

MESH_MAPS: dict[str, MeshMap] = {
    "uniform": MeshMap(
        name="uniform", g=lambda y: np.asarray(y, dtype=np.float64), g_prime=np.ones_like
    ),
    "exp": MeshMap(
        name="exp",
        g=lambda y: np.expm1(y) / (_E - 1.0),
        g_prime=lambda y: np.exp(y) / (_E - 1.0),
    ),
    "square": MeshMap(
        name="square", g=lambda y: np.square(y), g_prime=lambda y: 2.0 * np.asarray(y)
    ),
}


def get_mesh_map(mapping: str | MeshMap | Callable[[FloatArray], FloatArray]) -> MeshMap:
    """Resolve a map name, a MeshMap, or a bare callable g to a MeshMap."""
    if isinstance(mapping, MeshMap):
        return mapping
    if isinstance(mapping, str):
        try:
            return MESH_MAPS[mapping]
        except KeyError:
            raise MeshError(
                f"unknown mesh map '{mapping}', expected one of {sorted(MESH_MAPS)}"
            ) from None
    return MeshMap(name="custom", g=mapping)


def mesh_from_nodes(nodes: FloatArray, generator: MeshMap | None = None) -> Mesh:
    """Validated Mesh from an explicit node vector.

    Raises:
        MeshError: If the nodes are not an ascending partition of [-1, 1]
    """
    try:
        return Mesh(nodes=nodes, generator=generator)
    except ValidationError as e:
        raise MeshError(f"invalid mesh nodes: {e.errors()[0]['msg']}") from e


def uniform_mesh(N: int) -> Mesh:  # noqa: N803
    """Equispaced nodes x_i = -1 + 2i/N."""
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N}")
    nodes = -1.0 + 2.0 * np.arange(N + 1, dtype=np.float64) / N
    nodes[0], nodes[-1] = -1.0, 1.0
    return mesh_from_nodes(nodes, MESH_MAPS["uniform"])


def graded_mesh(
    N: int,  # noqa: N803
    mapping: str | MeshMap | Callable[[FloatArray], FloatArray],
) -> Mesh:
    """Nodes x_i = -1 + 2 g(i/N) for a named or custom grading map.

    A map G on [-1, 1] with x_i = G(-1 + 2i/N) gives the same mesh for
    g(u) = (1 + G(2u - 1)) / 2, and the cell widths are h_i ~ 2 g'(i/N) / N.

    Args:
        N: Number of cells
        mapping: "exp", "square", "uniform", a MeshMap, or a callable g on [0, 1]

    Returns:
        Mesh with endpoints pinned to exactly -1 and 1

    Raises:
        MeshError: If g(0) != 0, g(1) != 1, or g is not increasing on the grid
    """
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N}")
    gmap = get_mesh_map(mapping)
    y = np.arange(N + 1, dtype=np.float64) / N
    g = np.asarray(gmap.g(y), dtype=np.float64)
    if not (abs(g[0]) <= 1e-12 and abs(g[-1] - 1.0) <= 1e-12):
        raise MeshError(f"map '{gmap.name}' must satisfy g(0)=0 and g(1)=1")
    nodes = -1.0 + 2.0 * g
    nodes[0], nodes[-1] = -1.0, 1.0
    if np.any(np.diff(nodes) <= MIN_NODE_SEPARATION):
        raise MeshError(f"map '{gmap.name}' is not strictly increasing on the {N}-cell grid")
    return mesh_from_nodes(nodes, gmap)


def build_mesh(kind: str, N: int, mesh_file: Path | None = None) -> Mesh:  # noqa: N803
    """Mesh by CLI name; `file` reads the node table and ignores N."""
    if kind == "file":
        if mesh_file is None:
            raise MeshError("mesh kind 'file' needs a mesh file")
        return load_mesh_file(mesh_file)
    if kind == "uniform":
        return uniform_mesh(N)
    return graded_mesh(N, kind)


def load_mesh_file(path: Path | str) -> Mesh:
    """Read a node table: one node per line, ascending, first -1 and last 1.

    Blank lines and lines starting with '#' are skipped.
    """
    path = Path(path)
    try:
        df = pd.read_csv(path, header=None, comment="#", sep=r"\s+", dtype=np.float64)
    except (OSError, ValueError, pd.errors.EmptyDataError) as e:
        raise MeshError(f"cannot read mesh file {path}: {e}") from e
    if df.shape[1] != 1:
        raise MeshError(f"mesh file {path} must hold one node per line")
    nodes = df.iloc[:, 0].to_numpy(dtype=np.float64)
    logger.info(f"Loaded {nodes.shape[0]} nodes from {path}")
    return mesh_from_nodes(nodes)


def quasi_uniform_constants(mesh: Mesh, ratio_bound: float | None = None) -> QuasiUniformReport:
    """c_h = N min h_i, C_h = N max h_i, and whether C_h / c_h stays within the bound."""
    if ratio_bound is None:
        from src.config import get_settings

        ratio_bound = get_settings().quasi_uniform_ratio_bound
    h = mesh.widths
    n = mesh.n_cells
    c_h = float(n * np.min(h))
    big_c_h = float(n * np.max(h))
    return QuasiUniformReport(
        c_h=c_h, C_h=big_c_h, is_quasi_uniform_at_tolerance=big_c_h / c_h <= ratio_bound
    )


def diag_h(mesh: Mesh) -> DenseMatrix:
    """D_h = diag(h_1, ..., h_N)."""
    return np.diag(mesh.widths)
