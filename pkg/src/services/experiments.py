"""Experiment commands: identity checks, decay sweeps, symbols, stability, reconstruction."""

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from src.models.arrays import DenseMatrix, FloatArray
from src.models.experiment import Command, ExperimentConfig, RunManifest
from src.models.mesh import Mesh
from src.models.operators import HistoBasis
from src.models.params import JacobiParams
from src.models.spectral import ScalingSpec, ZeroDistributionReport
from src.models.stability import CALIBRATION_N, LogGrowthRecord, log_growth_bounded
from src.services.mesh import build_mesh, get_mesh_map
from src.services.operators import OperatorBuilder, create_operator_builder
from src.services.reconstruct import (
    TARGET_FUNCTIONS,
    HistopolationSolver,
    Target,
    evaluate_histopolant,
    load_tabulated_target,
)
from src.services.spectral import (
    compare_rearrangements,
    decay_report,
    sample_symbol_Delta,
    sample_symbol_TJ,
    scale_singular_values,
    singular_values,
    threshold_fraction,
    zero_distribution_probe,
)
from src.services.stability import StabilityAnalyzer
from src.utils.errors import ConfigurationError
from src.utils.export import export_bundle, write_manifest, write_table
from src.utils.parallel import bounded_map

logger = logging.getLogger(__name__)

FACTORIZATION_TOL = 1e-9
DECOMPOSITION_TOL = 1e-8
LEMMA_TOL = 1e-8
STABILITY_TOL = 1e-8
LOG_BOUND_SLACK = 1.5
SYMBOL_MEAN_TOL = 0.05
TOEPLITZ_MEAN_TOL = 0.01
AVERAGES_TOL = 1e-9
RECONSTRUCT_POINTS = 401

SV_DECAY_SCALINGS = [
    ScalingSpec(kind="divide_by_N_pow", gamma=1.0),
    ScalingSpec(kind="divide_by_N_pow", gamma=0.9),
    ScalingSpec(kind="divide_by_N_pow", gamma=0.8),
    ScalingSpec(kind="divide_by_logN_pow", gamma=4.0),
]

# family -> (matrix, scaling as a function of the configured gamma); N^g A is A / N^(-g)
PROBE_FAMILIES: dict[str, tuple[str, Callable[[float], ScalingSpec]]] = {
    "R": ("R", lambda g: ScalingSpec()),
    "R_scaled": ("R", lambda g: ScalingSpec(kind="divide_by_N_pow", gamma=-g)),
    "Iext": ("Iext", lambda g: ScalingSpec(kind="divide_by_N_pow", gamma=1.0)),
    "H_weighted": ("H", lambda g: ScalingSpec(kind="premultiply_sqrt_Dh_then_N_pow", gamma=g)),
    "H_negpow": ("H", lambda g: ScalingSpec(kind="divide_by_N_pow", gamma=-g)),
    "H_log": ("H", lambda g: ScalingSpec(kind="divide_by_logN_pow", gamma=g)),
}


@dataclass
class CommandResult:
    """Outcome of one command before it is written out."""

    passed: bool | None
    outputs: list[Path] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)


def package_versions() -> dict[str, str]:
    """Installed versions of the numerical stack."""
    versions = {}
    for name in ("jacobi-histopolation", "numpy", "scipy", "pandas", "pydantic"):
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


class ExperimentRunner:
    """Runs the experiment commands against shared builders."""

    def __init__(
        self,
        builder: OperatorBuilder,
        analyzer: StabilityAnalyzer,
        solver: HistopolationSolver,
        inversion_tolerance: float = 0.05,
    ) -> None:
        """
        Initialize the ExperimentRunner.

        Args:
            builder: Operator builder shared by all commands
            analyzer: Stability analyzer for the stability command
            solver: Histopolation solver for the reconstruct command
            inversion_tolerance: Relative size of the one tolerated decay inversion
        """
        self.builder = builder
        self.analyzer = analyzer
        self.solver = solver
        self.inversion_tolerance = inversion_tolerance

    # ==================== HELPERS ====================

    @staticmethod
    def _params(cfg: ExperimentConfig) -> JacobiParams:
        try:
            return JacobiParams(alpha=cfg.alpha, beta=cfg.beta)
        except ValueError as e:
            raise ConfigurationError(f"invalid Jacobi parameters: {e}") from e

    @staticmethod
    def _mesh(cfg: ExperimentConfig, N: int) -> Mesh:  # noqa: N803
        return build_mesh(cfg.mesh, N, cfg.mesh_file)

    def _sizes(self, cfg: ExperimentConfig) -> list[int]:
        if cfg.mesh == "file":
            return [self._mesh(cfg, 0).n_cells]
        return cfg.sizes

    def _family_matrix(self, name: str, params: JacobiParams, mesh: Mesh) -> DenseMatrix:
        if name == "R":
            return self.builder.build_R(params, mesh)
        if name == "Iext":
            return self.builder.build_Iext(params, mesh)
        return self.builder.build_H(params, mesh, HistoBasis.SHIFTED)

    # ==================== COMMANDS ====================

    def cmd_identities(self, cfg: ExperimentConfig) -> CommandResult:
        """Factorization residuals r1, r2 per N and the primitive-identity residuals."""
        params = self._params(cfg)
        if params.alpha <= 0.0 or params.beta <= 0.0:
            raise ConfigurationError(f"identities need alpha > 0 and beta > 0, got {params}")
        lemmas = self.builder.lemma_residuals(params)
        sizes = self._sizes(cfg)
        bundles = bounded_map(
            lambda n: self.builder.build_bundle(params, self._mesh(cfg, n)), sizes, cfg.workers
        )
        rows = []
        for n in sizes:
            report = self.builder.verify_factorization(params, self._mesh(cfg, n), bundles[n])
            rows.append(
                {
                    "N": n,
                    "r1": report.r1,
                    "r2": report.r2,
                    "ibp_max": lemmas.integration_by_parts_max,
                    "locality_max": lemmas.tridiagonal_locality_max,
                }
            )
        df = pd.DataFrame(rows)
        outputs = [write_table(df, cfg.out_dir / "identities.csv")]
        if cfg.export_format is not None:
            outputs += export_bundle(
                bundles[sizes[-1]], cfg.out_dir / "matrices", cfg.export_format
            )
        passed = bool(
            (df["r1"] <= FACTORIZATION_TOL).all()
            and (df["r2"] <= DECOMPOSITION_TOL).all()
            and lemmas.integration_by_parts_max <= LEMMA_TOL
            and lemmas.tridiagonal_locality_max <= LEMMA_TOL
        )
        summary = {
            "max_r1": float(df["r1"].max()),
            "max_r2": float(df["r2"].max()),
            "ibp_max": lemmas.integration_by_parts_max,
            "locality_max": lemmas.tridiagonal_locality_max,
        }
        return CommandResult(passed=passed, outputs=outputs, summary=summary)

    def cmd_sv_decay(self, cfg: ExperimentConfig) -> CommandResult:
        """Threshold fractions q_N(eps) under the configured family and scalings."""
        params = self._params(cfg)
        sizes = self._sizes(cfg)
        if cfg.family == "H":
            svals = bounded_map(
                lambda n: singular_values(
                    self.builder.build_H(params, self._mesh(cfg, n), HistoBasis.SHIFTED)
                ),
                sizes,
                cfg.workers,
            )
            reports = [
                decay_report(
                    "H",
                    spec,
                    {n: scale_singular_values(svals[n], spec, n) for n in sizes},
                    cfg.eps_list,
                    self.inversion_tolerance,
                )
                for spec in SV_DECAY_SCALINGS
            ]
        else:
            matrix, scaling = PROBE_FAMILIES[cfg.family]
            if matrix in ("R", "Iext") and (params.alpha <= 0.0 or params.beta <= 0.0):
                raise ConfigurationError(f"family {cfg.family} needs alpha > 0 and beta > 0")
            reports = [
                zero_distribution_probe(
                    lambda n: self._family_matrix(matrix, params, self._mesh(cfg, n)),
                    scaling(cfg.gamma),
                    sizes,
                    cfg.eps_list,
                    family=cfg.family,
                    mesh_for=lambda n: self._mesh(cfg, n),
                    workers=cfg.workers,
                    inversion_tolerance=self.inversion_tolerance,
                )
            ]
        df = _decay_frame(reports)
        outputs = [write_table(df, cfg.out_dir / "sv_decay.csv")]
        flags = {
            f"{r.scaling.label}@{eps:g}": flag
            for r in reports
            for eps, flag in r.decay_flags.items()
        }
        passed = all(flag is not False for flag in flags.values())
        return CommandResult(passed=passed, outputs=outputs, summary={"decay_flags": flags})

    def cmd_symbol_compare(self, cfg: ExperimentConfig) -> CommandResult:
        """Sorted singular values of N TJ or Delta/N against the rearranged symbol."""
        n = self._sizes(cfg)[-1]
        tolerance = SYMBOL_MEAN_TOL
        if cfg.symbol_target == "TJ":
            params = self._params(cfg)
            if params.alpha <= 0.0 or params.beta <= 0.0:
                raise ConfigurationError(f"T^(J) needs alpha > 0 and beta > 0, got {params}")
            svals = singular_values(n * self.builder.build_TJ(params, n))
            sym = sample_symbol_TJ(params, cfg.grid_m, cfg.trim)
        else:
            if cfg.mesh == "file":
                raise ConfigurationError("the Delta symbol needs a grading map, not a mesh file")
            mesh = self._mesh(cfg, n)
            svals = singular_values(self.builder.build_Delta(mesh) / n)
            sym = sample_symbol_Delta(get_mesh_map(cfg.mesh), cfg.grid_m, cfg.trim)
            if cfg.mesh == "uniform":
                tolerance = TOEPLITZ_MEAN_TOL
        comparison = compare_rearrangements(svals, sym)
        df = pd.DataFrame(
            {
                "quantile": comparison.quantiles,
                "sigma_value": comparison.sigma_values,
                "symbol_value": comparison.symbol_values,
            }
        )
        outputs = [write_table(df, cfg.out_dir / "symbol_compare.csv")]
        summary = {
            "N": n,
            "target": cfg.symbol_target,
            "window": list(comparison.window),
            "max_relative_deviation": comparison.max_relative_deviation,
            "mean_relative_deviation": comparison.mean_relative_deviation,
            "tolerance": tolerance,
        }
        passed = comparison.mean_relative_deviation <= tolerance
        return CommandResult(passed=passed, outputs=outputs, summary=summary)

    def cmd_stability(self, cfg: ExperimentConfig) -> CommandResult:
        """Stability reports per N and the log-growth check of lambda_max."""
        params = self._params(cfg)
        if params.alpha <= -0.5 or params.beta <= -0.5:
            raise ConfigurationError(f"stability needs alpha, beta > -1/2, got {params}")
        sizes = self._sizes(cfg)
        check_growth = cfg.mesh != "file"
        if check_growth and CALIBRATION_N not in sizes:
            raise ConfigurationError(
                f"the log-growth check is calibrated at N={CALIBRATION_N}; add it to n_list {sizes}"
            )
        reports = bounded_map(
            lambda n: self.analyzer.verify_stability(
                params, self._mesh(cfg, n), trials=cfg.trials, seed=cfg.seed
            ),
            sizes,
            cfg.workers,
        )
        df = pd.DataFrame(
            [
                {
                    "N": n,
                    "alpha": params.alpha,
                    "beta": params.beta,
                    "lambda_max": reports[n].lambda_max_gram,
                    "ratio": reports[n].log_bound_ratio,
                    "op_norm": reports[n].op_norm_2_to_h,
                    "min_margin": reports[n].inequality_margin,
                    "trace": reports[n].trace_gram,
                    "trace_ratio": reports[n].trace_log_ratio,
                    "psd_min": reports[n].psd_min_eigenvalue,
                }
                for n in sizes
            ]
        )
        outputs = [write_table(df, cfg.out_dir / "stability.csv")]
        growth = [
            LogGrowthRecord(
                N=n,
                lambda_max=reports[n].lambda_max_gram,
                trace=reports[n].trace_gram,
                log_bound_ratio=reports[n].log_bound_ratio,
                trace_log_ratio=reports[n].trace_log_ratio,
            )
            for n in sizes
        ]
        bounded = log_growth_bounded(growth, LOG_BOUND_SLACK) if check_growth else None
        passed = bounded is not False and all(reports[n].holds(STABILITY_TOL) for n in sizes)
        summary = {
            "seed": cfg.seed,
            "trials": cfg.trials,
            "calibration_n": CALIBRATION_N,
            "log_growth_bounded": bounded,
        }
        return CommandResult(passed=passed, outputs=outputs, summary=summary)

    def cmd_reconstruct(self, cfg: ExperimentConfig) -> CommandResult:
        """Histopolant of the target per N, sampled at 401 points, with average residuals."""
        params = self._params(cfg)
        target = self._target(cfg)
        x = np.linspace(-1.0, 1.0, RECONSTRUCT_POINTS)
        frames = []
        residuals = {}
        for n in self._sizes(cfg):
            mesh = self._mesh(cfg, n)
            p, b = self.solver.reconstruct(target, params, mesh)
            residuals[str(n)] = self.solver.verify_averages(p, mesh, b)
            frames.append(
                pd.DataFrame({"N": n, "x": x, "f": target(x), "p": evaluate_histopolant(p, x)})
            )
            logger.info(f"Reconstructed at N={n}: average residual {residuals[str(n)]:.3e}")
        df = pd.concat(frames, ignore_index=True)
        outputs = [write_table(df, cfg.out_dir / "reconstruct.csv")]
        passed = all(r <= AVERAGES_TOL for r in residuals.values())
        return CommandResult(
            passed=passed, outputs=outputs, summary={"average_residuals": residuals}
        )

    def cmd_probe_unscaled(self, cfg: ExperimentConfig) -> CommandResult:
        """sigma_j(H_N) against j/N for the unscaled matrices; exploratory."""
        params = self._params(cfg)
        sizes = self._sizes(cfg)
        svals = bounded_map(
            lambda n: singular_values(
                self.builder.build_H(params, self._mesh(cfg, n), HistoBasis.SHIFTED)
            ),
            sizes,
            cfg.workers,
        )
        df = pd.concat(
            [
                pd.DataFrame(
                    {"N": n, "j_over_N": np.arange(1, n + 1) / n, "sigma": svals[n]}
                )
                for n in sizes
            ],
            ignore_index=True,
        )
        outputs = [write_table(df, cfg.out_dir / "probe_unscaled.csv")]
        fractions = {str(n): summarize_svals(svals[n], cfg.eps_list, n) for n in sizes}
        return CommandResult(passed=None, outputs=outputs, summary={"q": fractions})

    def _target(self, cfg: ExperimentConfig) -> Target:
        if cfg.target_file is not None:
            return load_tabulated_target(cfg.target_file)
        try:
            return TARGET_FUNCTIONS[cfg.target]
        except KeyError:
            raise ConfigurationError(
                f"unknown target '{cfg.target}', expected one of {sorted(TARGET_FUNCTIONS)}"
            ) from None

    # ==================== DRIVER ====================

    def run(self, cfg: ExperimentConfig) -> RunManifest:
        """Run a command, write its CSV outputs and JSON sidecar, and return the manifest."""
        commands: dict[Command, Callable[[ExperimentConfig], CommandResult]] = {
            Command.IDENTITIES: self.cmd_identities,
            Command.SV_DECAY: self.cmd_sv_decay,
            Command.SYMBOL_COMPARE: self.cmd_symbol_compare,
            Command.STABILITY: self.cmd_stability,
            Command.RECONSTRUCT: self.cmd_reconstruct,
            Command.PROBE_UNSCALED: self.cmd_probe_unscaled,
        }
        logger.info(f"Running {cfg.command.value} for alpha={cfg.alpha:g}, beta={cfg.beta:g}")
        started = datetime.now(timezone.utc)
        tic = time.perf_counter()
        result = commands[cfg.command](cfg)
        manifest = RunManifest(
            command=cfg.command,
            config=cfg.model_dump(mode="json"),
            versions=package_versions(),
            started_at=started,
            wall_time_s=time.perf_counter() - tic,
            passed=result.passed,
            outputs=[str(p) for p in result.outputs],
            summary=result.summary,
        )
        sidecar = cfg.out_dir / f"{cfg.command.value.replace('-', '_')}.json"
        write_manifest(manifest, sidecar)
        status = "passed" if result.passed is not False else "FAILED"
        logger.info(
            f"{cfg.command.value} {status} in {manifest.wall_time_s:.2f}s; sidecar {sidecar}"
        )
        return manifest


def _decay_frame(reports: list[ZeroDistributionReport]) -> pd.DataFrame:
    rows = [
        {"N": r.N, "scaling": report.scaling.label, "gamma": r.gamma, "eps": r.eps, "q": r.q}
        for report in reports
        for r in report.records
    ]
    return pd.DataFrame(rows, columns=["N", "scaling", "gamma", "eps", "q"])


def create_experiment_runner() -> ExperimentRunner:
    """
    Create an ExperimentRunner instance using application settings.

    Returns:
        Configured ExperimentRunner instance
    """
    from src.config import get_settings
    from src.services.reconstruct import create_histopolation_solver
    from src.services.stability import create_stability_analyzer

    return ExperimentRunner(
        builder=create_operator_builder(),
        analyzer=create_stability_analyzer(),
        solver=create_histopolation_solver(),
        inversion_tolerance=get_settings().decay_inversion_tolerance,
    )


def summarize_svals(svals: FloatArray, eps_list: list[float], n: int) -> dict[str, float]:
    """q_N(eps) for each eps, keyed by the formatted threshold."""
    return {f"{eps:g}": threshold_fraction(svals, eps, n) for eps in eps_list}
