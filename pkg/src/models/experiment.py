"""Experiment configuration and run manifest Pydantic models."""

import json
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from src.utils.errors import ConfigurationError


class Command(str, Enum):
    """Experiment commands of the runner."""

    IDENTITIES = "identities"
    SV_DECAY = "sv-decay"
    SYMBOL_COMPARE = "symbol-compare"
    STABILITY = "stability"
    RECONSTRUCT = "reconstruct"
    PROBE_UNSCALED = "probe-unscaled"

    @property
    def uses_svd(self) -> bool:
        return self in (Command.SV_DECAY, Command.SYMBOL_COMPARE, Command.PROBE_UNSCALED)


DEFAULT_N_LISTS: dict[Command, list[int]] = {
    Command.IDENTITIES: [16, 64, 256],
    Command.SV_DECAY: [1000, 2000, 3000],
    Command.SYMBOL_COMPARE: [2000],
    Command.STABILITY: [16, 64, 128],
    Command.RECONSTRUCT: [8, 16, 32],
    Command.PROBE_UNSCALED: [500, 1000, 2000],
}

DEFAULT_EPS_LIST = [1e-2, 5e-3, 1e-3]

MeshKind = Literal["uniform", "exp", "square", "file"]
FamilyName = Literal["H", "R", "R_scaled", "Iext", "H_weighted", "H_negpow", "H_log"]


class ExperimentConfig(BaseModel):
    """Full configuration of one experiment run."""

    command: Command
    alpha: float = 2.0
    beta: float = 2.0
    mesh: MeshKind = "uniform"
    mesh_file: Optional[Path] = None
    n_list: Optional[list[int]] = None
    eps_list: list[float] = Field(default_factory=lambda: list(DEFAULT_EPS_LIST))
    gamma: float = 0.4
    grid_m: int = Field(default=2000, ge=2)
    trim: tuple[float, float] = (0.05, 0.95)
    seed: int = 0
    trials: int = Field(default=200, ge=1)
    out_dir: Path = Path("results")
    workers: int = Field(default=1, ge=1)
    allow_large_n: bool = False
    large_n_cap: int = 4000
    target: str = "exp"
    target_file: Optional[Path] = None
    symbol_target: Literal["TJ", "Delta"] = "TJ"
    family: FamilyName = "H"
    export_format: Optional[Literal["csv", "binary"]] = None

    @field_validator("n_list")
    @classmethod
    def n_list_ascending(cls, v: Optional[list[int]]) -> Optional[list[int]]:
        """Validate that sizes are positive and strictly ascending."""
        if v is None:
            return v
        if not v:
            raise ValueError("n_list must not be empty")
        if any(n < 1 for n in v):
            raise ValueError("sizes must be >= 1")
        if any(b <= a for a, b in zip(v[:-1], v[1:])):
            raise ValueError("n_list must be strictly ascending")
        return v

    @field_validator("eps_list")
    @classmethod
    def eps_positive(cls, v: list[float]) -> list[float]:
        """Validate that every threshold is positive."""
        if not v or any(e <= 0.0 for e in v):
            raise ValueError("eps_list must hold positive thresholds")
        return v

    @field_validator("trim")
    @classmethod
    def trim_window(cls, v: tuple[float, float]) -> tuple[float, float]:
        """Validate 0 <= lo < hi <= 1."""
        lo, hi = v
        if not 0.0 <= lo < hi <= 1.0:
            raise ValueError("trim window must satisfy 0 <= lo < hi <= 1")
        return v

    @model_validator(mode="after")
    def fill_and_gate(self) -> "ExperimentConfig":
        """Fill the per-command N-list and enforce the size cap and mesh-file rule."""
        if self.n_list is None:
            self.n_list = list(DEFAULT_N_LISTS[self.command])
        if self.mesh == "file" and self.mesh_file is None:
            raise ValueError("mesh 'file' needs mesh_file")
        if self.command.uses_svd and not self.allow_large_n and max(self.n_list) > self.large_n_cap:
            raise ValueError(
                f"N={max(self.n_list)} exceeds the cap {self.large_n_cap}; pass allow_large_n"
            )
        return self

    @property
    def sizes(self) -> list[int]:
        return list(self.n_list or [])

    @classmethod
    def from_sources(
        cls,
        config_file: Optional[Path] = None,
        overrides: Optional[dict[str, Any]] = None,
        defaults: Optional[dict[str, Any]] = None,
    ) -> "ExperimentConfig":
        """
        Build a config from an optional JSON file overlaid by explicit values.

        Args:
            config_file: JSON object with ExperimentConfig fields
            overrides: Values that take precedence; None entries are ignored
            defaults: Values used when neither the file nor the overrides set them

        Returns:
            Validated ExperimentConfig

        Raises:
            ConfigurationError: If the file is unreadable or the merged values are invalid
        """
        data: dict[str, Any] = dict(defaults or {})
        if config_file is not None:
            try:
                file_data = json.loads(Path(config_file).read_text())
            except (OSError, json.JSONDecodeError) as e:
                raise ConfigurationError(f"cannot read config file {config_file}: {e}") from e
            if not isinstance(file_data, dict):
                raise ConfigurationError(f"config file {config_file} must hold a JSON object")
            data.update(file_data)
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigurationError(f"invalid experiment configuration: {e}") from e


class RunManifest(BaseModel):
    """JSON sidecar describing one command run."""

    command: Command
    config: dict[str, Any]
    versions: dict[str, str]
    started_at: datetime
    wall_time_s: float = Field(ge=0.0)
    passed: Optional[bool] = None
    outputs: list[str] = Field(default_factory=list)
    summary: dict[str, Any] = Field(default_factory=dict)
