"""Integration tests for the experiment runner command line.

Feature: jacobi-histopolation
Properties 39-41: Command Line
Validates: main, config_from_args, ExperimentRunner.run
"""

import json
from pathlib import Path

import pandas as pd
import pytest

from src.cli import EXIT_CONFIG, EXIT_OK, main
from src.utils.export import read_matrix_binary


def _sidecar(out: Path, name: str) -> dict:
    return json.loads((out / f"{name}.json").read_text())


class TestProperty39IdentityRuns:
    """Property 39: Identity Runs.

    *For any* admissible run, the identities command SHALL exit 0, write one CSV row
    per N and a JSON sidecar, and produce byte-identical tables on repeated runs.

    **Validates: main, cmd_identities**
    """

    def test_identities(self, tmp_path: Path) -> None:
        """Residual table and sidecar."""
        out = tmp_path / "out"
        args = ["identities", "--alpha", "2", "--beta", "2", "--n-list", "8,16", "--out", str(out)]
        assert main(args) == EXIT_OK
        df = pd.read_csv(out / "identities.csv")
        assert list(df.columns) == ["N", "r1", "r2", "ibp_max", "locality_max"]
        assert df["N"].tolist() == [8, 16]
        assert (df["r1"] <= 1e-9).all() and (df["r2"] <= 1e-8).all()
        sidecar = _sidecar(out, "identities")
        assert sidecar["command"] == "identities"
        assert sidecar["passed"] is True
        assert sidecar["config"]["n_list"] == [8, 16]
        assert "numpy" in sidecar["versions"]

    def test_tables_are_deterministic(self, tmp_path: Path) -> None:
        """Two runs write the same bytes."""
        args = ["identities", "--alpha", "1.5", "--beta", "1", "--n-list", "8,12"]
        assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
        assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
        first = (tmp_path / "a" / "identities.csv").read_bytes()
        assert first == (tmp_path / "b" / "identities.csv").read_bytes()

    def test_binary_export(self, tmp_path: Path) -> None:
        """The operator bundle of the largest N is dumped."""
        out = tmp_path / "out"
        code = main(
            ["identities", "--n-list", "4,8", "--export-format", "binary", "--out", str(out)]
        )
        assert code == EXIT_OK
        assert read_matrix_binary(out / "matrices" / "H_N8.bin").shape == (8, 8)
        assert read_matrix_binary(out / "matrices" / "Iext_N8.bin").shape == (9, 10)

    def test_rejects_small_exponents(self, tmp_path: Path) -> None:
        """alpha <= 0 is a configuration error for the identities."""
        args = ["identities", "--alpha", "-0.4", "--n-list", "8", "--out", str(tmp_path)]
        assert main(args) == EXIT_CONFIG

    def test_config_file_is_overridden(self, tmp_path: Path) -> None:
        """Flags take precedence over the config file."""
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"alpha": 1.0, "beta": 1.0, "n_list": [8]}))
        out = tmp_path / "out"
        args = ["identities", "--config", str(config), "--alpha", "2", "--out", str(out)]
        assert main(args) == EXIT_OK
        recorded = _sidecar(out, "identities")["config"]
        assert recorded["alpha"] == 2.0 and recorded["beta"] == 1.0
        assert recorded["n_list"] == [8]


class TestProperty40SpectralRuns:
    """Property 40: Spectral Runs.

    *For any* SVD command, sizes above the cap SHALL be refused with exit code 2,
    and accepted runs SHALL write their tables.

    **Validates: cmd_sv_decay, cmd_symbol_compare, cmd_probe_unscaled**
    """

    def test_size_cap(self, tmp_path: Path) -> None:
        """N = 5000 needs --allow-large-n."""
        assert main(["sv-decay", "--n-list", "5000", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_sv_decay_table(self, tmp_path: Path) -> None:
        """One row per scaling, N and eps."""
        main(["sv-decay", "--n-list", "20,40", "--eps-list", "1e-2,1e-3", "--out", str(tmp_path)])
        df = pd.read_csv(tmp_path / "sv_decay.csv")
        assert list(df.columns) == ["N", "scaling", "gamma", "eps", "q"]
        assert len(df) == 4 * 2 * 2
        assert df["q"].between(0.0, 1.0).all()

    def test_probe_family(self, tmp_path: Path) -> None:
        """A probe family is labelled by its scaling."""
        args = ["sv-decay", "--family", "H_weighted", "--gamma", "0.4", "--n-list", "16,32"]
        main(args + ["--out", str(tmp_path)])
        df = pd.read_csv(tmp_path / "sv_decay.csv")
        assert set(df["scaling"]) == {"N^0.4*Dh^(1/2)*A"}

    def test_delta_symbol_compare(self, tmp_path: Path) -> None:
        """Delta/N on a uniform mesh matches its symbol."""
        args = ["symbol-compare", "--symbol-target", "Delta", "--n-list", "400", "--grid-m", "800"]
        code = main(args + ["--out", str(tmp_path)])
        assert code == EXIT_OK
        summary = _sidecar(tmp_path, "symbol_compare")["summary"]
        assert summary["mean_relative_deviation"] <= 0.01
        df = pd.read_csv(tmp_path / "symbol_compare.csv")
        assert list(df.columns) == ["quantile", "sigma_value", "symbol_value"]
        assert len(df) == 400

    def test_tj_symbol_needs_positive_exponents(self, tmp_path: Path) -> None:
        """The T^(J) comparison refuses alpha <= 0 before building anything."""
        args = ["symbol-compare", "--symbol-target", "TJ", "--alpha", "-0.3", "--n-list", "8"]
        assert main(args + ["--out", str(tmp_path)]) == EXIT_CONFIG
        assert not (tmp_path / "symbol_compare.csv").exists()

    def test_probe_unscaled(self, tmp_path: Path) -> None:
        """Exploratory runs have no verdict and exit 0."""
        assert main(["probe-unscaled", "--n-list", "10,20", "--out", str(tmp_path)]) == EXIT_OK
        df = pd.read_csv(tmp_path / "probe_unscaled.csv")
        assert len(df) == 30
        sidecar = _sidecar(tmp_path, "probe_unscaled")
        assert sidecar["passed"] is None
        assert set(sidecar["summary"]["q"]) == {"10", "20"}


class TestProperty41StabilityAndReconstruction:
    """Property 41: Stability and Reconstruction Runs.

    *For any* admissible run, stability and reconstruction SHALL exit 0 and record
    their seed, trial count and per-N residuals.

    **Validates: cmd_stability, cmd_reconstruct**
    """

    def test_stability(self, tmp_path: Path) -> None:
        """Small sizes pass and the seed is recorded."""
        args = ["stability", "--n-list", "8,16", "--trials", "20", "--seed", "5"]
        code = main(args + ["--out", str(tmp_path)])
        assert code == EXIT_OK
        summary = _sidecar(tmp_path, "stability")["summary"]
        assert summary["seed"] == 5 and summary["trials"] == 20
        assert summary["calibration_n"] == 16 and summary["log_growth_bounded"] is True
        df = pd.read_csv(tmp_path / "stability.csv")
        assert df["N"].tolist() == [8, 16]
        assert (df["min_margin"] >= -1e-8).all()

    def test_stability_needs_calibration_size(self, tmp_path: Path) -> None:
        """Size lists without N = 16 are refused before any Gram build."""
        args = ["stability", "--n-list", "8,32", "--trials", "5", "--out", str(tmp_path)]
        assert main(args) == EXIT_CONFIG
        assert not (tmp_path / "stability.csv").exists()

    def test_reconstruct(self, tmp_path: Path) -> None:
        """Samples at 401 points per N."""
        args = ["reconstruct", "--target", "runge", "--n-list", "8,16", "--mesh", "exp"]
        code = main(args + ["--out", str(tmp_path)])
        assert code == EXIT_OK
        df = pd.read_csv(tmp_path / "reconstruct.csv")
        assert list(df.columns) == ["N", "x", "f", "p"]
        assert len(df) == 802
        residuals = _sidecar(tmp_path, "reconstruct")["summary"]["average_residuals"]
        assert set(residuals) == {"8", "16"}

    def test_unknown_target(self, tmp_path: Path) -> None:
        """An unknown target name is a configuration error."""
        args = ["reconstruct", "--target", "sinc", "--n-list", "8", "--out", str(tmp_path)]
        assert main(args) == EXIT_CONFIG

    def test_unknown_command(self) -> None:
        """argparse rejects unknown commands."""
        with pytest.raises(SystemExit) as excinfo:
            main(["eigen-decay"])
        assert excinfo.value.code == 2
