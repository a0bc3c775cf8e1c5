"""Configuration utilities for hybridfv runs.

``Config`` holds the raw nested settings: JSON on disk, dot-notation access
and command-line overrides. ``to_run_config`` validates them into a
``RunConfig``; ``parse_config`` and ``build_run_config`` are shortcuts.
"""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from hybridfv.exceptions import ConfigError, ExpressionError
from hybridfv.utils.expression import parse_expression

PROBLEMS = ("test1", "test2", "custom")
MESH_SOURCES = ("generate", "file")
OUTPUT_FORMATS = ("csv", "vtk", "gnuplot")
STORAGE_LAWS = ("identity", "sqrt", "u_plus_sqrt")
REACTION_LAWS = ("zero", "half_sqrt", "linear")
EXPRESSION_KEYS = ("source", "initial", "dirichlet", "exact")


class Config:
    """Configuration manager for hybridfv runs."""

    DEFAULT_CONFIG: dict[str, dict[str, Any]] = {
        "problem": {
            "name": "test1",
            "p": 0.2,
            "v": 0.8,
            "delta": 0.01,
            "consistent_source": True,
            "custom": {},
        },
        "mesh": {
            "source": "generate",
            "path": None,
            "domain": None,
            "resolution": [6, 3, 3],
            "refine_probability": 0.3,
            "refine_seed": 2011,
            "refine_passes": 1,
        },
        "time": {
            "T": 1.0,
            "N": 50,
        },
        "solver": {
            "atol": 1e-10,
            "rtol": 1e-12,
            "max_iterations": 50,
            "max_halvings": 8,
            "condense": True,
            "variable_switch": True,
            "alpha": None,
        },
        "output": {
            "directory": "runs",
            "snapshot_stride": 10,
            "formats": ["csv", "vtk", "gnuplot"],
        },
        "convergence": {
            "levels": 3,
            "front_threshold": 1e-3,
        },
    }

    def __init__(self, config_path: str | Path | None = None):
        """Initialize configuration.

        Args:
            config_path: Path to JSON config file (optional)

        Raises:
            ConfigError: If ``config_path`` is given but cannot be loaded

        """
        self.config = copy.deepcopy(self.DEFAULT_CONFIG)

        if config_path is not None:
            self.load(config_path)

    def load(self, path: str | Path) -> None:
        """Load configuration from JSON file.

        Raises:
            ConfigError: If the file is missing, is not valid JSON or names
                an unknown section or key

        """
        path = Path(path)
        if not path.is_file():
            raise ConfigError("config", f"file not found: {path}")
        try:
            custom_config = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            msg = f"invalid JSON at line {e.lineno}: {e.msg}"
            raise ConfigError("config", msg) from e
        if not isinstance(custom_config, dict):
            raise ConfigError("config", "top level must be an object of sections")
        self._merge_config(custom_config)

    def _merge_config(self, custom_config: dict[str, Any]) -> None:
        """Merge custom config with defaults, rejecting unknown sections and keys."""
        for section, values in custom_config.items():
            if section not in self.DEFAULT_CONFIG:
                raise ConfigError(section, "unknown section")
            if not isinstance(values, dict):
                raise ConfigError(section, "section must be an object")
            for key in values:
                if key not in self.DEFAULT_CONFIG[section]:
                    raise ConfigError(f"{section}.{key}", "unknown key")
            self.config[section].update(copy.deepcopy(values))

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value by dot-notation key."""
        keys = key.split(".")
        value = self.config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return value

    def set(self, key: str, value: Any) -> None:
        """Set a ``section.key`` value (command-line overrides).

        Raises:
            ConfigError: If the key is not a known ``section.key`` pair

        """
        section, _, name = key.partition(".")
        if not name or "." in name:
            raise ConfigError(key, "expected a 'section.key' path")
        self._merge_config({section: {name: value}})

    def to_run_config(self) -> RunConfig:
        """Validate the merged settings into a RunConfig.

        Raises:
            ConfigError: On the first invalid key, naming its dotted path

        """
        raw = self.config
        solver, output = raw["solver"], raw["output"]
        return RunConfig(
            problem=_problem_section(raw["problem"]),
            mesh=_mesh_section(raw["mesh"]),
            time=TimeConfig(
                T=_number("time.T", raw["time"]["T"], positive=True),
                N=_integer("time.N", raw["time"]["N"], minimum=1),
            ),
            solver=SolverConfig(
                atol=_number("solver.atol", solver["atol"], positive=True),
                rtol=_number("solver.rtol", solver["rtol"], positive=True),
                max_iterations=_integer(
                    "solver.max_iterations", solver["max_iterations"], minimum=1
                ),
                max_halvings=_integer(
                    "solver.max_halvings", solver["max_halvings"], minimum=0
                ),
                condense=_boolean("solver.condense", solver["condense"]),
                variable_switch=_boolean(
                    "solver.variable_switch", solver["variable_switch"]
                ),
                alpha=None
                if solver["alpha"] is None
                else _number("solver.alpha", solver["alpha"], positive=True),
            ),
            output=OutputConfig(
                directory=_string("output.directory", output["directory"]),
                snapshot_stride=_integer(
                    "output.snapshot_stride", output["snapshot_stride"], minimum=1
                ),
                formats=_formats(output["formats"]),
            ),
            convergence=ConvergenceConfig(
                levels=_integer(
                    "convergence.levels", raw["convergence"]["levels"], minimum=1
                ),
                front_threshold=_number(
                    "convergence.front_threshold",
                    raw["convergence"]["front_threshold"],
                    lo=0.0,
                    hi=1.0,
                    positive=True,
                ),
            ),
        )


@dataclass(frozen=True)
class ProblemConfig:
    """Problem selection and parameters."""

    name: str = "test1"
    p: float = 0.2
    v: float = 0.8
    delta: float = 0.01
    consistent_source: bool = True
    custom: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class MeshConfig:
    """Mesh source: a generated (randomly refined) box or a mesh file."""

    source: str = "generate"
    path: str | None = None
    domain: list[list[float]] | None = None
    resolution: list[int] = field(default_factory=lambda: [6, 3, 3])
    refine_probability: float = 0.3
    refine_seed: int = 2011
    refine_passes: int = 1


@dataclass(frozen=True)
class TimeConfig:
    """Uniform time grid on [0, T] with N steps."""

    T: float = 1.0  # noqa: N815
    N: int = 50  # noqa: N815


@dataclass(frozen=True)
class SolverConfig:
    """Newton and linear solver settings."""

    atol: float = 1e-10
    rtol: float = 1e-12
    max_iterations: int = 50
    max_halvings: int = 8
    condense: bool = True
    variable_switch: bool = True
    alpha: float | None = None


@dataclass(frozen=True)
class OutputConfig:
    """Output directory, snapshot stride and formats."""

    directory: str = "runs"
    snapshot_stride: int = 10
    formats: list[str] = field(default_factory=lambda: list(OUTPUT_FORMATS))


@dataclass(frozen=True)
class ConvergenceConfig:
    """Convergence study settings."""

    levels: int = 3
    front_threshold: float = 1e-3


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run configuration."""

    problem: ProblemConfig = field(default_factory=ProblemConfig)
    mesh: MeshConfig = field(default_factory=MeshConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    convergence: ConvergenceConfig = field(default_factory=ConvergenceConfig)

    def to_dict(self) -> dict[str, Any]:
        """Return the fully defaulted configuration as nested dictionaries."""
        return asdict(self)


def parse_config(path: str | Path) -> RunConfig:
    """Read and validate a JSON run configuration.

    Args:
        path: Configuration file

    Returns:
        Validated RunConfig with defaults applied

    Raises:
        ConfigError: If the file is missing or unreadable, or any key is
            unknown, missing, mistyped or out of range

    """
    return Config(path).to_run_config()


def build_run_config(data: dict[str, Any]) -> RunConfig:
    """Validate nested settings (defaults filled in for absent keys).

    Raises:
        ConfigError: On the first invalid key, naming its dotted path

    """
    config = Config()
    config._merge_config(data)
    return config.to_run_config()


def _problem_section(raw: dict[str, Any]) -> ProblemConfig:
    name = _choice("problem.name", raw["name"], PROBLEMS)
    custom = raw["custom"]
    if not isinstance(custom, dict):
        raise ConfigError("problem.custom", "must be an object")
    if name == "custom":
        custom = _custom_section(custom)
    return ProblemConfig(
        name=name,
        p=_number("problem.p", raw["p"]),
        v=_number("problem.v", raw["v"], positive=True),
        delta=_number("problem.delta", raw["delta"], positive=True),
        consistent_source=_boolean(
            "problem.consistent_source", raw["consistent_source"]
        ),
        custom=custom,
    )


_CUSTOM_DEFAULTS: dict[str, Any] = {
    "storage": "identity",
    "reaction": "zero",
    "reaction_coefficient": 0.0,
    "diffusion": None,
    "velocity": None,
    "domain": None,
    "source": "0",
    "initial": None,
    "dirichlet": None,
    "exact": None,
    "zero_flux_sides": [],
}


def _custom_section(raw: dict[str, Any]) -> dict[str, Any]:
    for key in raw:
        if key not in _CUSTOM_DEFAULTS:
            raise ConfigError(f"problem.custom.{key}", "unknown key")
    custom = {**_CUSTOM_DEFAULTS, **raw}
    for key in ("domain", "initial"):
        if custom[key] is None:
            raise ConfigError(f"problem.custom.{key}", "missing required key")
    domain = _domain("problem.custom.domain", custom["domain"])
    dim = len(domain)
    custom["domain"] = domain
    custom["storage"] = _choice(
        "problem.custom.storage", custom["storage"], STORAGE_LAWS
    )
    custom["reaction"] = _choice(
        "problem.custom.reaction", custom["reaction"], REACTION_LAWS
    )
    custom["reaction_coefficient"] = _number(
        "problem.custom.reaction_coefficient", custom["reaction_coefficient"]
    )
    if custom["diffusion"] is None:
        custom["diffusion"] = [
            [1.0 if i == j else 0.0 for j in range(dim)] for i in range(dim)
        ]
    custom["diffusion"] = _matrix("problem.custom.diffusion", custom["diffusion"], dim)
    if custom["velocity"] is None:
        custom["velocity"] = [0.0] * dim
    custom["velocity"] = _vector("problem.custom.velocity", custom["velocity"], dim)
    if custom["dirichlet"] is None:
        custom["dirichlet"] = custom["exact"] if custom["exact"] is not None else "0"
    for key in EXPRESSION_KEYS:
        if custom[key] is not None:
            _expression(f"problem.custom.{key}", custom[key])
    sides = custom["zero_flux_sides"]
    valid_sides = [f"x{axis + 1}{sign}" for axis in range(dim) for sign in "-+"]
    if not isinstance(sides, list) or any(side not in valid_sides for side in sides):
        raise ConfigError(
            "problem.custom.zero_flux_sides", f"must be a list of {valid_sides}"
        )
    return custom


def _mesh_section(raw: dict[str, Any]) -> MeshConfig:
    source = _choice("mesh.source", raw["source"], MESH_SOURCES)
    path = raw["path"]
    if source == "file":
        if path is None:
            raise ConfigError("mesh.path", "missing required key for source 'file'")
        path = _string("mesh.path", path)
        if not Path(path).is_file():
            raise ConfigError("mesh.path", f"file not found: {path}")
    domain = None if raw["domain"] is None else _domain("mesh.domain", raw["domain"])
    resolution = raw["resolution"]
    if (
        not isinstance(resolution, list)
        or len(resolution) not in (2, 3)
        or any(
            isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in resolution
        )
    ):
        raise ConfigError("mesh.resolution", "must be a list of 2 or 3 integers >= 1")
    if domain is not None and len(domain) != len(resolution):
        raise ConfigError("mesh.resolution", "needs one entry per domain axis")
    return MeshConfig(
        source=source,
        path=path,
        domain=domain,
        resolution=list(resolution),
        refine_probability=_number(
            "mesh.refine_probability", raw["refine_probability"], lo=0.0, hi=1.0
        ),
        refine_seed=_integer("mesh.refine_seed", raw["refine_seed"], minimum=0),
        refine_passes=_integer("mesh.refine_passes", raw["refine_passes"], minimum=0),
    )


def _number(
    key: str,
    value: Any,
    *,
    positive: bool = False,
    lo: float | None = None,
    hi: float | None = None,
) -> float:
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise ConfigError(key, f"expected a number, got {type(value).__name__}")
    value = float(value)
    if positive and value <= 0:
        raise ConfigError(key, f"must be > 0, got {value}")
    if lo is not None and value < lo:
        raise ConfigError(key, f"must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(key, f"must be <= {hi}, got {value}")
    return value


def _integer(key: str, value: Any, *, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"expected an integer, got {type(value).__name__}")
    if minimum is not None and value < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {value}")
    return value


def _boolean(key: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(key, f"expected true or false, got {type(value).__name__}")
    return value


def _string(key: str, value: Any) -> str:
    if not isinstance(value, str) or not value:
        raise ConfigError(key, "expected a non-empty string")
    return value


def _choice(key: str, value: Any, choices: tuple[str, ...]) -> str:
    if value not in choices:
        raise ConfigError(key, f"must be one of {list(choices)}, got {value!r}")
    return value


def _formats(value: Any) -> list[str]:
    if not isinstance(value, list) or any(item not in OUTPUT_FORMATS for item in value):
        raise ConfigError(
            "output.formats", f"must be a list drawn from {list(OUTPUT_FORMATS)}"
        )
    return list(value)


def _domain(key: str, value: Any) -> list[list[float]]:
    if not isinstance(value, list) or len(value) not in (2, 3):
        raise ConfigError(key, "must be a list of 2 or 3 [lo, hi] pairs")
    domain = []
    for axis, bounds in enumerate(value):
        if not isinstance(bounds, list) or len(bounds) != 2:
            raise ConfigError(f"{key}[{axis}]", "must be a [lo, hi] pair")
        lo = _number(f"{key}[{axis}]", bounds[0])
        hi = _number(f"{key}[{axis}]", bounds[1])
        if hi <= lo:
            raise ConfigError(
                f"{key}[{axis}]",
                f"upper bound must exceed lower bound, got {bounds}",
            )
        domain.append([lo, hi])
    return domain


def _vector(key: str, value: Any, dim: int) -> list[float]:
    if not isinstance(value, list) or len(value) != dim:
        raise ConfigError(key, f"must be a list of {dim} numbers")
    return [_number(f"{key}[{i}]", item) for i, item in enumerate(value)]


def _matrix(key: str, value: Any, dim: int) -> list[list[float]]:
    if not isinstance(value, list) or len(value) != dim:
        raise ConfigError(key, f"must be a {dim}x{dim} list of lists")
    return [_vector(f"{key}[{i}]", row, dim) for i, row in enumerate(value)]


def _expression(key: str, value: Any) -> None:
    if not isinstance(value, str):
        raise ConfigError(key, "expected an expression string")
    try:
        parse_expression(value)
    except ExpressionError as e:
        raise ConfigError(key, str(e)) from e
