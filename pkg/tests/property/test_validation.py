"""Property-based tests for data model validation.

Feature: jacobi-histopolation
Properties 35-38: Data Model Validation
Validates: JacobiParams, Mesh, OperatorBundle, PanelRule, ExperimentConfig, Settings
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from pydantic import ValidationError

from src.config import Settings
from src.models.experiment import DEFAULT_N_LISTS, Command, ExperimentConfig
from src.models.mesh import Mesh
from src.models.operators import OperatorBundle
from src.models.params import JacobiParams
from src.models.quadrature import PanelRule
from src.utils.errors import ConfigurationError

admissible = st.floats(min_value=-0.999, max_value=20.0, allow_nan=False)
inadmissible = st.one_of(
    st.floats(max_value=-1.0, allow_nan=False, allow_infinity=False),
    st.sampled_from([math.nan, math.inf, -math.inf]),
)


class TestProperty35JacobiParams:
    """Property 35: Jacobi Parameter Validation.

    *For any* alpha, beta > -1, JacobiParams SHALL be created with sigma = alpha + beta
    and delta = alpha - beta; *for any* exponent <= -1 or non-finite, Pydantic SHALL
    raise a ValidationError.

    **Validates: JacobiParams**
    """

    @settings(max_examples=100)
    @given(alpha=admissible, beta=admissible)
    def test_accepts_admissible(self, alpha: float, beta: float) -> None:
        """Derived sigma and delta."""
        p = JacobiParams(alpha=alpha, beta=beta)
        assert p.sigma == alpha + beta
        assert p.delta == alpha - beta
        assert p.shifted().exponents == (alpha + 1.0, beta + 1.0)

    @settings(max_examples=100)
    @given(bad=inadmissible)
    def test_rejects_alpha(self, bad: float) -> None:
        """alpha <= -1 or non-finite is rejected."""
        with pytest.raises(ValidationError):
            JacobiParams(alpha=bad, beta=0.0)

    @settings(max_examples=100)
    @given(bad=inadmissible)
    def test_rejects_beta(self, bad: float) -> None:
        """beta <= -1 or non-finite is rejected."""
        with pytest.raises(ValidationError):
            JacobiParams(alpha=0.0, beta=bad)

    def test_frozen(self) -> None:
        """Parameters are immutable and hashable."""
        p = JacobiParams(alpha=1.0, beta=2.0)
        with pytest.raises(ValidationError):
            p.alpha = 3.0
        assert hash(p) == hash(JacobiParams(alpha=1.0, beta=2.0))
        assert str(p) == "(alpha=1, beta=2)"


class TestProperty36MeshModel:
    """Property 36: Mesh Model Validation.

    *For any* node vector that does not start at -1, end at 1 and increase
    strictly, Pydantic SHALL raise a ValidationError.

    **Validates: Mesh**
    """

    @pytest.mark.parametrize(
        "nodes",
        [
            [-1.0],
            [-1.0, 0.5],
            [-0.5, 1.0],
            [-1.0, 0.2, 0.2, 1.0],
            [-1.0, np.nan, 1.0],
            [[-1.0, 1.0]],
        ],
    )
    def test_rejects(self, nodes: list) -> None:
        """Short, misplaced, repeated, non-finite and two-dimensional node sets."""
        with pytest.raises(ValidationError):
            Mesh(nodes=np.array(nodes))

    def test_input_array_is_copied(self) -> None:
        """Validation does not freeze the caller's array."""
        x = np.array([-1.0, 0.0, 1.0])
        mesh = Mesh(nodes=x)
        x[1] = 0.5
        assert mesh.nodes[1] == 0.0
        assert mesh.name == "custom"


class TestProperty37OperatorBundle:
    """Property 37: Operator Bundle Shapes.

    *For any* N, OperatorBundle SHALL accept H (N x N), Delta (N x (N+1)),
    Psi and R ((N+1) x N), Iext ((N+1) x (N+2)) and TJ ((N+2) x N) and reject
    any other shape.

    **Validates: OperatorBundle**
    """

    @staticmethod
    def _shapes(n: int) -> dict[str, np.ndarray]:
        return {
            "H": np.zeros((n, n)),
            "Delta": np.zeros((n, n + 1)),
            "Psi": np.zeros((n + 1, n)),
            "R": np.zeros((n + 1, n)),
            "Iext": np.zeros((n + 1, n + 2)),
            "TJ": np.zeros((n + 2, n)),
        }

    @settings(max_examples=20)
    @given(n=st.integers(min_value=1, max_value=12))
    def test_accepts_compatible(self, n: int) -> None:
        """Compatible shapes validate."""
        bundle = OperatorBundle(params=JacobiParams(alpha=1.0, beta=1.0), **self._shapes(n))
        assert bundle.n == n

    @pytest.mark.parametrize("name", ["Delta", "Psi", "R", "Iext", "TJ"])
    def test_rejects_incompatible(self, name: str) -> None:
        """A factor with a dropped row is rejected."""
        shapes = self._shapes(5)
        shapes[name] = shapes[name][:-1]
        with pytest.raises(ValidationError):
            OperatorBundle(params=JacobiParams(alpha=1.0, beta=1.0), **shapes)

    def test_array_fields_are_copied_and_frozen(self) -> None:
        """Stored matrices are private read-only copies of the inputs."""
        shapes = self._shapes(3)
        bundle = OperatorBundle(params=JacobiParams(alpha=1.0, beta=1.0), **shapes)
        shapes["H"][0, 0] = 7.0
        assert bundle.H[0, 0] == 0.0
        assert not bundle.H.flags.writeable

    def test_index_fields_are_copied_and_frozen(self) -> None:
        """Integer index arrays are copied and frozen like float arrays."""
        cells = np.array([0, 0, 1, 1])
        rule = PanelRule(
            points=np.array([-0.5, -0.25, 0.25, 0.5]),
            weights=np.full(4, 0.5),
            cell_index=cells,
            n_cells=2,
            n_panels=2,
        )
        cells[0] = 1
        assert rule.cell_index[0] == 0
        assert rule.cell_index.dtype == np.int64
        assert not rule.cell_index.flags.writeable
        with pytest.raises(ValueError):
            rule.cell_index[1] = 1


class TestProperty38ExperimentConfig:
    """Property 38: Experiment Configuration.

    *For any* command, ExperimentConfig SHALL fill the per-command N-list, reject
    unsorted sizes, non-positive thresholds and bad trim windows, cap SVD sizes
    unless allowed, and merge file values under explicit overrides.

    **Validates: ExperimentConfig, ExperimentConfig.from_sources, Settings**
    """

    @pytest.mark.parametrize("command", list(Command))
    def test_default_sizes(self, command: Command) -> None:
        """Each command has its own default N-list."""
        config = ExperimentConfig(command=command)
        assert config.sizes == DEFAULT_N_LISTS[command]
        assert config.alpha == 2.0 and config.beta == 2.0

    @pytest.mark.parametrize(
        "field,value",
        [
            ("n_list", [64, 16]),
            ("n_list", [16, 16]),
            ("n_list", []),
            ("n_list", [0, 4]),
            ("eps_list", [1e-2, 0.0]),
            ("eps_list", []),
            ("trim", (0.5, 0.5)),
            ("trim", (-0.1, 0.9)),
            ("grid_m", 1),
            ("workers", 0),
            ("trials", 0),
        ],
    )
    def test_rejects_invalid(self, field: str, value: object) -> None:
        """Invalid field values raise ValidationError."""
        with pytest.raises(ValidationError):
            ExperimentConfig(command=Command.IDENTITIES, **{field: value})

    def test_large_n_cap(self) -> None:
        """SVD commands above the cap need allow_large_n; others are not capped."""
        with pytest.raises(ValidationError):
            ExperimentConfig(command=Command.SV_DECAY, n_list=[5000])
        allowed = ExperimentConfig(command=Command.SV_DECAY, n_list=[5000], allow_large_n=True)
        assert allowed.sizes == [5000]
        assert ExperimentConfig(command=Command.IDENTITIES, n_list=[5000]).sizes == [5000]

    def test_mesh_file_required(self) -> None:
        """mesh 'file' needs a path."""
        with pytest.raises(ValidationError):
            ExperimentConfig(command=Command.IDENTITIES, mesh="file")

    def test_from_sources_precedence(self, tmp_path: Path) -> None:
        """Overrides beat the file, which beats the defaults; None overrides are ignored."""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"alpha": 1.5, "beta": 1.0, "seed": 3, "n_list": [8, 16]}))
        config = ExperimentConfig.from_sources(
            config_file=path,
            overrides={"command": "stability", "seed": 9, "beta": None},
            defaults={"seed": 1, "trials": 50},
        )
        assert config.command is Command.STABILITY
        assert config.alpha == 1.5 and config.beta == 1.0
        assert config.seed == 9
        assert config.trials == 50
        assert config.sizes == [8, 16]

    @pytest.mark.parametrize(
        "content", ["{not json", "[1, 2]", '{"command": "identities", "n_list": [4, 2]}']
    )
    def test_from_sources_errors(self, tmp_path: Path, content: str) -> None:
        """Unreadable, non-object and invalid files raise ConfigurationError."""
        path = tmp_path / "config.json"
        path.write_text(content)
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_sources(config_file=path, overrides={"command": "identities"})

    def test_from_sources_missing_file(self, tmp_path: Path) -> None:
        """A missing file raises ConfigurationError."""
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_sources(config_file=tmp_path / "absent.json")

    def test_command_properties(self) -> None:
        """Only spectral commands are SVD-bound."""
        assert Command.SV_DECAY.uses_svd
        assert Command.SYMBOL_COMPARE.uses_svd
        assert not Command.STABILITY.uses_svd

    def test_settings_from_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Environment variables override the numerical defaults."""
        monkeypatch.setenv("QUADRATURE_TOL", "1e-9")
        monkeypatch.setenv("MAX_WORKERS", "4")
        s = Settings()
        assert s.quadrature_tol == 1e-9
        assert s.max_workers == 4
        assert s.grading_ratio == 0.25
