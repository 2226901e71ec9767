"""Command-line entry point of the histopolation experiment runner.

Usage:
    histopolation identities --alpha 2 --beta 2 --n-list 16,64,256
    histopolation sv-decay --alpha 1.5 --beta 1 --n-list 1000,2000,3000 --workers 3
    histopolation symbol-compare --symbol-target Delta --mesh exp --n-list 2000
    histopolation stability --alpha 0.6 --beta 0.8 --mesh square
    histopolation reconstruct --target runge --n-list 8,16,32
    histopolation probe-unscaled --n-list 500,1000

Exit codes: 0 when every check passes, 1 on a violated check or numerical failure,
2 when the configuration is rejected.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Optional

from src.config import get_settings
from src.models.experiment import Command, ExperimentConfig
from src.utils.errors import ConfigurationError, HistopolationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got '{text}'"
        ) from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got '{text}'"
        ) from None


def _trim(text: str) -> tuple[float, float]:
    values = _float_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got '{text}'")
    return values[0], values[1]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="histopolation", description="Weighted Jacobi histopolation experiments"
    )
    parser.add_argument("command", choices=[c.value for c in Command], help="Experiment to run")
    parser.add_argument("--config", type=Path, help="JSON config file; flags override its values")
    parser.add_argument("--alpha", type=float, help="Jacobi exponent at t=1")
    parser.add_argument("--beta", type=float, help="Jacobi exponent at t=-1")
    parser.add_argument("--mesh", choices=["uniform", "exp", "square", "file"], help="Node family")
    parser.add_argument("--mesh-file", type=Path, help="Node table, one node per line")
    parser.add_argument("--n-list", type=_int_list, help="Ascending sizes, e.g. 16,64,256")
    parser.add_argument("--eps-list", type=_float_list, help="Thresholds, e.g. 1e-2,5e-3,1e-3")
    parser.add_argument("--gamma", type=float, help="Exponent of the probe-family scaling")
    parser.add_argument("--family", help="Matrix family for sv-decay (default: H)")
    parser.add_argument("--grid-m", type=int, help="Symbol grid size per axis")
    parser.add_argument("--trim", type=_trim, help="Quantile window 'lo,hi'")
    parser.add_argument("--seed", type=int, help="Seed of the stability trials")
    parser.add_argument("--trials", type=int, help="Random trials per stability report")
    parser.add_argument("--out", type=Path, dest="out_dir", help="Output directory")
    parser.add_argument("--workers", type=int, help="Worker threads for per-N tasks")
    parser.add_argument(
        "--allow-large-n", action="store_true", default=None, help="Lift the size cap of SVD runs"
    )
    parser.add_argument("--target", help="Reconstruction target: one, exp, runge or cubic")
    parser.add_argument("--target-file", type=Path, help="Two-column table (x, f) of the target")
    parser.add_argument("--symbol-target", choices=["TJ", "Delta"], help="Matrix to compare")
    parser.add_argument(
        "--export-format", choices=["csv", "binary"], help="Dump the operator bundle (identities)"
    )
    parser.add_argument(
        "--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Logging level"
    )
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Merge the config file, settings defaults and explicit flags."""
    settings = get_settings()
    overrides: dict[str, Any] = {
        k: v for k, v in vars(args).items() if k not in ("config", "log_level")
    }
    defaults = {
        "grid_m": settings.symbol_grid_m,
        "trim": (settings.symbol_trim_lo, settings.symbol_trim_hi),
        "seed": settings.default_seed,
        "trials": settings.stability_trials,
        "workers": settings.max_workers,
        "large_n_cap": settings.large_n_cap,
    }
    return ExperimentConfig.from_sources(args.config, overrides, defaults)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    settings = get_settings()
    logging.basicConfig(
        level=args.log_level or settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        cfg = config_from_args(args)
    except ConfigurationError as e:
        logger.error(str(e))
        return EXIT_CONFIG

    from src.services.experiments import create_experiment_runner

    try:
        manifest = create_experiment_runner().run(cfg)
    except ConfigurationError as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except HistopolationError as e:
        logger.error(f"{cfg.command.value} failed: {e}")
        return EXIT_VIOLATION

    return EXIT_VIOLATION if manifest.passed is False else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
