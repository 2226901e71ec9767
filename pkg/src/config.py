"""Application settings from environment variables."""

from functools import lru_cache

from dotenv import load_dotenv
from pydantic_settings import BaseSettings

# Load environment variables
load_dotenv()


class Settings(BaseSettings):
    """Numerical defaults, overridable from the environment or a .env file."""

    # Logging
    log_level: str = "INFO"

    # Quadrature
    quadrature_order: int = 32
    quadrature_check_order: int = 48
    quadrature_tol: float = 1e-11
    grading_ratio: float = 0.25
    grading_levels_max: int = 40
    panel_budget: int = 512
    phase_budget_factor: float = 0.125  # max Jacobi phase per panel = factor * pi * order

    # Mesh
    quasi_uniform_ratio_bound: float = 100.0

    # Linear solves
    condition_limit: float = 1e14

    # Spectral experiments
    symbol_grid_m: int = 2000
    symbol_trim_lo: float = 0.05
    symbol_trim_hi: float = 0.95
    decay_inversion_tolerance: float = 0.05

    # Stability
    stability_trials: int = 200
    psd_check_max_n: int = 512

    # Runner
    default_seed: int = 0
    max_workers: int = 1
    large_n_cap: int = 4000

    model_config = {"env_file": ".env", "extra": "ignore"}


@lru_cache
def get_settings() -> Settings:
    """Get cached application settings."""
    return Settings()
