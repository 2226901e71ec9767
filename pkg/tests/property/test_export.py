"""Property-based tests for table and matrix exports.

Feature: jacobi-histopolation
Property 42: Exports
Validates: write_table, write_matrix_csv, write_matrix_binary, read_matrix_binary, export_bundle
"""

from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from src.models.params import JacobiParams
from src.services.mesh import uniform_mesh
from src.services.operators import OperatorBuilder
from src.utils.errors import ExportError
from src.utils.export import (
    MATRIX_MAGIC,
    export_bundle,
    read_matrix_binary,
    write_matrix_binary,
    write_matrix_csv,
    write_table,
)


class TestProperty42Exports:
    """Property 42: Exports.

    *For any* float64 matrix, the binary dump SHALL restore it bit for bit and the
    CSV writers SHALL keep 17 significant digits; damaged dumps SHALL raise ExportError.

    **Validates: write_table, write_matrix_csv, write_matrix_binary, read_matrix_binary**
    """

    def test_binary_restores_bits(self, tmp_path: Path) -> None:
        """Values including signed zero and subnormals survive."""
        A = np.array([[0.1, -0.0, 5e-324], [1e308, np.pi, -1.0 / 3.0]])  # noqa: N806
        path = write_matrix_binary(A, tmp_path / "m" / "A.bin")
        restored = read_matrix_binary(path)
        assert restored.shape == (2, 3)
        assert restored.tobytes() == A.tobytes()
        assert path.read_bytes()[: len(MATRIX_MAGIC)] == MATRIX_MAGIC

    def test_binary_layout(self, tmp_path: Path) -> None:
        """Header, then row-major little-endian entries."""
        path = write_matrix_binary(np.array([[1.0, 2.0]]), tmp_path / "A.bin")
        raw = path.read_bytes()
        assert len(raw) == len(MATRIX_MAGIC) + 16 + 16
        assert np.frombuffer(raw, dtype="<u8", count=2, offset=len(MATRIX_MAGIC)).tolist() == [1, 2]

    def test_binary_errors(self, tmp_path: Path) -> None:
        """Vectors cannot be written; bad magic and truncation are detected."""
        with pytest.raises(ExportError):
            write_matrix_binary(np.ones(3), tmp_path / "v.bin")
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"NOTAMTRX" + bytes(16))
        with pytest.raises(ExportError):
            read_matrix_binary(bad)
        path = write_matrix_binary(np.ones((3, 3)), tmp_path / "A.bin")
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ExportError):
            read_matrix_binary(path)

    def test_csv_keeps_precision(self, tmp_path: Path) -> None:
        """17 significant digits restore every value exactly."""
        values = np.array([0.1, 1.0 / 3.0, np.pi * 1e-20, 2.0**-1074])
        path = write_table(pd.DataFrame({"v": values}), tmp_path / "t.csv")
        restored = pd.read_csv(path, float_precision="round_trip")["v"].to_numpy()
        np.testing.assert_array_equal(restored, values)
        A = np.array([[1.0 / 7.0, -2.0], [3.5, 1e-300]])  # noqa: N806
        matrix_path = write_matrix_csv(A, tmp_path / "A.csv")
        np.testing.assert_array_equal(
            pd.read_csv(matrix_path, header=None, float_precision="round_trip").to_numpy(), A
        )

    def test_bundle_export(
        self, tmp_path: Path, builder: OperatorBuilder, params_symmetric: JacobiParams
    ) -> None:
        """Six files per bundle in either format; unknown formats are refused."""
        bundle = builder.build_bundle(params_symmetric, uniform_mesh(6))
        files = export_bundle(bundle, tmp_path / "csv", "csv")
        expected = [f"{n}_N6.csv" for n in ("H", "Delta", "Psi", "R", "Iext", "TJ")]
        assert [f.name for f in files] == expected
        binaries = export_bundle(bundle, tmp_path / "bin", "binary")
        np.testing.assert_array_equal(read_matrix_binary(binaries[5]), bundle.TJ)
        with pytest.raises(ExportError):
            export_bundle(bundle, tmp_path / "x", "hdf5")
