"""CSV, binary and JSON writers for experiment outputs and operator matrices."""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from src.models.arrays import DenseMatrix
from src.models.experiment import RunManifest
from src.models.operators import OperatorBundle
from src.utils.errors import ExportError

logger = logging.getLogger(__name__)

# 17 significant digits round-trip every float64; %-formatting ignores the locale.
FLOAT_FORMAT = "%.17g"

MATRIX_MAGIC = b"HISTMAT1"


def write_table(df: pd.DataFrame, path: Path) -> Path:
    """Write a record table as CSV with full float precision."""
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(df)} rows to {path}")
    return path


def write_matrix_csv(A: DenseMatrix, path: Path) -> Path:  # noqa: N803
    """Dense matrix as CSV, one row per line, no header."""
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(np.asarray(A)).to_csv(
        path, header=False, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    return path


def write_matrix_binary(A: DenseMatrix, path: Path) -> Path:  # noqa: N803
    """Magic, (rows, cols) as little-endian uint64, then little-endian float64 row-major."""
    A = np.asarray(A, dtype=np.float64)  # noqa: N806
    if A.ndim != 2:
        raise ExportError(f"expected a matrix, got shape {A.shape}")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(MATRIX_MAGIC)
        f.write(np.asarray(A.shape, dtype="<u8").tobytes())
        f.write(np.ascontiguousarray(A, dtype="<f8").tobytes())
    return path


def read_matrix_binary(path: Path) -> DenseMatrix:
    """Inverse of write_matrix_binary."""
    raw = Path(path).read_bytes()
    header = len(MATRIX_MAGIC) + 16
    if len(raw) < header or raw[: len(MATRIX_MAGIC)] != MATRIX_MAGIC:
        raise ExportError(f"{path} is not a matrix dump")
    dims = np.frombuffer(raw, dtype="<u8", count=2, offset=len(MATRIX_MAGIC))
    rows, cols = (int(v) for v in dims)
    if len(raw) != header + 8 * rows * cols:
        raise ExportError(f"{path} is truncated: expected {rows}x{cols} entries")
    data = np.frombuffer(raw, dtype="<f8", offset=header).astype(np.float64)
    return data.reshape(rows, cols)


def export_bundle(bundle: OperatorBundle, out_dir: Path, fmt: str = "csv") -> list[Path]:
    """Write H, Delta, Psi, R, Iext and TJ of a bundle, one file each."""
    if fmt not in ("csv", "binary"):
        raise ExportError(f"unknown export format '{fmt}'")
    written = []
    for name in ("H", "Delta", "Psi", "R", "Iext", "TJ"):
        matrix = getattr(bundle, name)
        if fmt == "csv":
            written.append(write_matrix_csv(matrix, out_dir / f"{name}_N{bundle.n}.csv"))
        else:
            written.append(write_matrix_binary(matrix, out_dir / f"{name}_N{bundle.n}.bin"))
    logger.info(f"Exported operator bundle at N={bundle.n} to {out_dir} ({fmt})")
    return written


def write_manifest(manifest: RunManifest, path: Path) -> Path:
    """JSON sidecar of a run."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.model_dump_json(indent=2))
    return path
