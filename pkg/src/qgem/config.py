"""Config loader + run dataclasses.

Config files are JSON (YAML is accepted as well; both go through
``yaml.safe_load``). Example::

    {
      "mode": "phases",
      "phase_matrix_rad_per_s": [[0, 1, 2], [1, 0, 1.5], [2, 1.5, 0]],
      "run": {"engine": "both", "measures": ["iconcurrence", "q_k"],
              "t_start": 0, "t_end": 10, "steps": 101}
    }

Numbers may be written as strings ("1e-4"); YAML reads exponent-only floats
that way and every numeric field is coerced.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from qgem.bipartition import Bipartition, all_bipartitions, one_vs_rest
from qgem.closedform import CLAMP_TOLERANCE, RADICAND_TOLERANCE, TangleConvention
from qgem.errors import QGEMError
from qgem.geometry import (
    DEFAULT_MIN_PAIR_DISTANCE,
    MassSpec,
    PairPhaseTable,
    PhaseMatrix,
    PhysicalConstants,
    SetupDiagnostics,
    SystemSetup,
    entangling_phases,
    phase_table,
    random_phase_matrix,
    validate_setup,
)
from qgem.graphanalysis import DEFAULT_EPSILON_EDGE, RationalPhases
from qgem.oracle import DEFAULT_MAX_QUBITS
from qgem.results import Measure
from qgem.telemetry import log_config_loaded

ENGINE_CHOICES: dict[str, tuple[str, ...]] = {
    "closed": ("closed",),
    "oracle": ("oracle",),
    "both": ("closed", "oracle"),
}


class ConfigError(ValueError):
    """Raised when a config file is missing, malformed, or invalid."""


class ConfigParseError(ConfigError):
    """The file does not parse, or a field has the wrong type."""

    def __init__(
        self, message: str, line: int | None = None, field: str | None = None
    ) -> None:
        super().__init__(message)
        self.line = line
        self.field = field


class ConfigValidationError(ConfigError):
    """The config parses but describes an invalid run or system."""

    def __init__(self, message: str, violations: list[str]) -> None:
        super().__init__(message + "".join(f"\n  - {v}" for v in violations))
        self.violations = list(violations)


class InputMode(enum.Enum):
    GEOMETRY = "geometry"
    PHASES = "phases"
    RATIONAL = "rational-phases"


@dataclass
class Tolerances:
    compare: float = 1e-9
    epsilon_edge: float = DEFAULT_EPSILON_EDGE
    clamp: float = CLAMP_TOLERANCE
    radicand: float = RADICAND_TOLERANCE


@dataclass
class RunConfig:
    """The ``run`` block; CLI flags override individual fields."""

    engine: str = "closed"
    measures: list[Measure] = field(default_factory=lambda: [Measure.ICONCURRENCE])
    bipartitions: str | list[str] = "all"
    t_start: float = 0.0
    t_end: float = 1.0
    steps: int = 11
    out: str | None = None
    report: str | None = None
    compare: bool = False
    seed: int = 0
    workers: int = 1
    max_qubits: int = DEFAULT_MAX_QUBITS
    tangle3_interpretation: TangleConvention = TangleConvention.UNORDERED
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def engines(self) -> tuple[str, ...]:
        return ENGINE_CHOICES[self.engine]


@dataclass
class LoadedConfig:
    """Top-level object produced by load_config(): run settings + domain objects."""

    source: str
    mode: InputMode
    run: RunConfig
    phases: PhaseMatrix
    table: PairPhaseTable
    bipartitions: list[Bipartition]
    setup: SystemSetup | None = None
    constants: PhysicalConstants | None = None
    diagnostics: SetupDiagnostics | None = None
    rational: RationalPhases | None = None
    pairwise_incommensurate: bool = False

    @property
    def n(self) -> int:
        return self.phases.n

    def with_run(self, **changes: Any) -> LoadedConfig:
        return replace(self, run=replace(self.run, **changes))


def load_config(
    path: str | Path, overrides: Mapping[str, Any] | None = None
) -> LoadedConfig:
    """Load and validate a run config.

    ``overrides`` replace keys of the ``run`` block before validation
    (``None`` values are ignored), so flags win over the file.

    Raises:
        ConfigParseError: missing file, invalid JSON/YAML, or wrong field type.
        ConfigValidationError: the config describes an invalid run or system.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigParseError(f"Config file not found: {path}")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        where = f" at line {line}" if line is not None else ""
        raise ConfigParseError(f"Invalid JSON in {path}{where}: {problem}", line=line)
    config = parse_config(data, overrides, source=str(path))
    log_config_loaded(config)
    return config


def parse_config(
    data: Any, overrides: Mapping[str, Any] | None = None, source: str = "<config>"
) -> LoadedConfig:
    """Validate an already-parsed config mapping."""
    if not isinstance(data, dict):
        raise ConfigParseError("Config must be a JSON object")
    if "mode" not in data:
        raise ConfigParseError("Config missing required field: mode", field="mode")
    try:
        mode = InputMode(data["mode"])
    except ValueError:
        known = ", ".join(m.value for m in InputMode)
        raise ConfigParseError(
            f"Unknown mode {data['mode']!r}. Known: {known}", field="mode"
        )

    raw_run = data.get("run") or {}
    if not isinstance(raw_run, dict):
        raise ConfigParseError("'run' must be an object", field="run")
    flags = {k: v for k, v in (overrides or {}).items() if v is not None}
    raw_run = {**raw_run, **flags}
    run = _parse_run(raw_run)

    setup = constants = diagnostics = rational = None
    try:
        if mode is InputMode.GEOMETRY:
            setup, constants = _parse_geometry(data)
            diagnostics = validate_setup(setup)
            if not diagnostics.ok:
                raise ConfigValidationError(
                    "Setup is not physically valid",
                    [v.message for v in diagnostics.violations],
                )
            table = phase_table(setup, constants)
            phases = entangling_phases(table)
        elif mode is InputMode.PHASES:
            phases, table = _parse_phases(data, run.seed)
        else:
            rational = _parse_rational(data)
            phases = rational.to_phase_matrix()
            table = PairPhaseTable.from_phase_matrix(phases)
    except QGEMError as exc:
        raise ConfigValidationError("Invalid system description", [str(exc)])

    violations: list[str] = []
    if phases.n < 2:
        violations.append(f"At least 2 masses are required, got {phases.n}")
    for measure in run.measures:
        if measure.needs_three_masses and phases.n != 3:
            violations.append(
                f"Measure {measure.value!r} is defined for 3 masses, got {phases.n}"
            )
    bipartitions: list[Bipartition] = []
    if phases.n >= 2:
        try:
            bipartitions = resolve_bipartitions(run.bipartitions, phases.n)
        except QGEMError as exc:
            violations.append(str(exc))
    if violations:
        raise ConfigValidationError("Invalid run configuration", violations)

    return LoadedConfig(
        source=source,
        mode=mode,
        run=run,
        phases=phases,
        table=table,
        bipartitions=bipartitions,
        setup=setup,
        constants=constants,
        diagnostics=diagnostics,
        rational=rational,
        pairwise_incommensurate=_bool(
            data.get("pairwise_incommensurate", False), "pairwise_incommensurate"
        ),
    )


def resolve_bipartitions(selector: str | list[str], n: int) -> list[Bipartition]:
    """``"all"``, ``"one-vs-rest"`` or explicit labels.

    Explicit labels come as a list or as one string separated by ``,``
    (``;`` once N >= 10, where labels contain commas themselves).
    """
    if isinstance(selector, str):
        key = selector.strip()
        if key == "all":
            return all_bipartitions(n)
        if key == "one-vs-rest":
            return one_vs_rest(n)
        sep = ";" if (";" in key or n >= 10) else ","
        labels = [label for label in key.split(sep) if label.strip()]
    else:
        labels = list(selector)
    found = {Bipartition.parse(label, n) for label in labels}
    return sorted(found, key=Bipartition.sort_key)


# ---------------------------------------------------------------------------
# Section parsers
# ---------------------------------------------------------------------------


def _parse_run(raw: dict[str, Any]) -> RunConfig:
    run = RunConfig()
    violations: list[str] = []

    if "engine" in raw:
        run.engine = str(raw["engine"])
        if run.engine not in ENGINE_CHOICES:
            violations.append(
                f"engine must be one of {', '.join(ENGINE_CHOICES)}, got {run.engine!r}"
            )
    if "measures" in raw:
        names = raw["measures"]
        if isinstance(names, str):
            names = [part for part in names.split(",") if part.strip()]
        if not isinstance(names, list) or not names:
            raise ConfigParseError(
                "run.measures must be a non-empty list", field="run.measures"
            )
        try:
            chosen = {Measure.parse(str(name)) for name in names}
        except ValueError as exc:
            raise ConfigParseError(str(exc), field="run.measures")
        run.measures = [m for m in Measure if m in chosen]
    if "bipartitions" in raw:
        selector = raw["bipartitions"]
        if not isinstance(selector, (str, list)):
            raise ConfigParseError(
                "run.bipartitions must be a string or a list of labels",
                field="run.bipartitions",
            )
        run.bipartitions = selector

    run.t_start = _float(raw.get("t_start", run.t_start), "run.t_start")
    run.t_end = _float(raw.get("t_end", run.t_end), "run.t_end")
    run.steps = _int(raw.get("steps", run.steps), "run.steps")
    run.seed = _int(raw.get("seed", run.seed), "run.seed")
    run.workers = _int(raw.get("workers", run.workers), "run.workers")
    run.max_qubits = _int(raw.get("max_qubits", run.max_qubits), "run.max_qubits")
    run.compare = _bool(raw.get("compare", run.compare), "run.compare")
    run.out = _optional_str(raw.get("out"), "run.out")
    run.report = _optional_str(raw.get("report"), "run.report")

    if "tangle3_interpretation" in raw:
        try:
            run.tangle3_interpretation = TangleConvention(raw["tangle3_interpretation"])
        except ValueError:
            known = ", ".join(c.value for c in TangleConvention)
            raise ConfigParseError(
                f"Unknown tangle3_interpretation {raw['tangle3_interpretation']!r}. "
                f"Known: {known}",
                field="run.tangle3_interpretation",
            )

    raw_tol = raw.get("tolerances") or {}
    if not isinstance(raw_tol, dict):
        raise ConfigParseError(
            "run.tolerances must be an object", field="run.tolerances"
        )
    for name in ("compare", "epsilon_edge", "clamp", "radicand"):
        if name in raw_tol:
            value = _float(raw_tol[name], f"run.tolerances.{name}")
            if value < 0 or (name == "compare" and value == 0):
                violations.append(f"run.tolerances.{name} must be positive")
            setattr(run.tolerances, name, value)

    if not run.t_start >= 0:
        violations.append(f"t_start must be >= 0, got {run.t_start}")
    if not run.t_end > run.t_start:
        violations.append(
            f"t_end must exceed t_start, got t_start={run.t_start} t_end={run.t_end}"
        )
    if run.steps < 1:
        violations.append(f"steps must be >= 1, got {run.steps}")
    if run.workers < 1:
        violations.append(f"workers must be >= 1, got {run.workers}")
    if run.max_qubits < 2:
        violations.append(f"max_qubits must be >= 2, got {run.max_qubits}")
    if violations:
        raise ConfigValidationError("Invalid run configuration", violations)
    return run


def _parse_geometry(data: dict[str, Any]) -> tuple[SystemSetup, PhysicalConstants]:
    raw_masses = data.get("masses")
    if not isinstance(raw_masses, list) or not raw_masses:
        raise ConfigParseError(
            "Geometry mode needs a non-empty 'masses' list", field="masses"
        )
    masses = []
    for i, entry in enumerate(raw_masses):
        where = f"masses[{i}]"
        if not isinstance(entry, dict):
            raise ConfigParseError(f"{where} must be an object", field=where)
        for key in ("mass_kg", "loc0", "loc1"):
            if key not in entry:
                raise ConfigParseError(
                    f"{where} missing required field: {key}", field=f"{where}.{key}"
                )
        masses.append(
            MassSpec(
                mass=_float(entry["mass_kg"], f"{where}.mass_kg"),
                loc0=_vector(entry["loc0"], f"{where}.loc0"),
                loc1=_vector(entry["loc1"], f"{where}.loc1"),
            )
        )
    raw_constants = data.get("constants") or {}
    defaults = PhysicalConstants()
    constants = PhysicalConstants(
        G=_float(raw_constants.get("G", defaults.G), "constants.G"),
        hbar=_float(raw_constants.get("hbar", defaults.hbar), "constants.hbar"),
    )
    min_distance = _float(
        data.get("min_distance_m", DEFAULT_MIN_PAIR_DISTANCE), "min_distance_m"
    )
    return SystemSetup(tuple(masses), min_distance), constants


def _parse_phases(
    data: dict[str, Any], seed: int
) -> tuple[PhaseMatrix, PairPhaseTable]:
    sources = [
        key
        for key in ("phase_matrix_rad_per_s", "pair_phase_table", "random_phases")
        if key in data
    ]
    if len(sources) != 1:
        raise ConfigParseError(
            "Phases mode needs exactly one of phase_matrix_rad_per_s, "
            f"pair_phase_table, random_phases (got {sources or 'none'})",
            field="phase_matrix_rad_per_s",
        )
    source = sources[0]

    if source == "pair_phase_table":
        table = _parse_pair_table(data["pair_phase_table"])
        return entangling_phases(table), table

    if source == "random_phases":
        block = data["random_phases"]
        if not isinstance(block, dict) or "n" not in block:
            raise ConfigParseError(
                "random_phases must be an object with at least 'n'",
                field="random_phases",
            )
        phases = random_phase_matrix(
            _int(block["n"], "random_phases.n"),
            np.random.default_rng(seed),
            low=_float(block.get("low", 0.0), "random_phases.low"),
            high=_float(block.get("high", 5.0), "random_phases.high"),
        )
        return phases, PairPhaseTable.from_phase_matrix(phases)

    values = _matrix(data["phase_matrix_rad_per_s"], "phase_matrix_rad_per_s")
    signs = None
    if data.get("phase_signs") is not None:
        signs = _matrix(data["phase_signs"], "phase_signs")
    phases = PhaseMatrix(values, signs)
    return phases, PairPhaseTable.from_phase_matrix(phases)


def _parse_pair_table(raw: Any) -> PairPhaseTable:
    """``{"1-2": [phi00, phi01, phi10, phi11], ...}``; N is the largest index."""
    if not isinstance(raw, dict) or not raw:
        raise ConfigParseError(
            "pair_phase_table must map 'p-q' labels to 4 rates",
            field="pair_phase_table",
        )
    pairs: dict[tuple[int, int], list[float]] = {}
    for label, rates in raw.items():
        where = f"pair_phase_table.{label}"
        try:
            p, q = (int(part) - 1 for part in str(label).split("-"))
        except ValueError:
            raise ConfigParseError(
                f"Pair label {label!r} must look like '1-2'", field=where
            )
        if not isinstance(rates, list) or len(rates) != 4:
            raise ConfigParseError(f"{where} needs 4 rates", field=where)
        if p < 0 or q < 0:
            raise ConfigParseError(f"Pair label {label!r} is 1-based", field=where)
        pairs[(p, q)] = [_float(r, where) for r in rates]
    n = max(max(p, q) for p, q in pairs) + 1
    return PairPhaseTable.from_pairs(n, pairs)


def _parse_rational(data: dict[str, Any]) -> RationalPhases:
    raw = data.get("rational")
    if not isinstance(raw, dict) or "multipliers" not in raw:
        raise ConfigParseError(
            "Rational-phases mode needs 'rational': {base_rad_per_s, multipliers}",
            field="rational",
        )
    base = _float(raw.get("base_rad_per_s", 1.0), "rational.base_rad_per_s")
    rows = raw["multipliers"]
    if not isinstance(rows, list):
        raise ConfigParseError(
            "rational.multipliers must be a matrix", field="rational.multipliers"
        )
    try:
        multipliers = tuple(tuple(_fraction(x) for x in row) for row in rows)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigParseError(
            f"rational.multipliers: {exc}", field="rational.multipliers"
        )
    return RationalPhases(base, multipliers)


# ---------------------------------------------------------------------------
# Field coercion
# ---------------------------------------------------------------------------


def _float(value: Any, name: str) -> float:
    if isinstance(value, bool):
        raise ConfigParseError(f"{name} must be a number, got {value!r}", field=name)
    try:
        result = float(value)
    except (TypeError, ValueError):
        raise ConfigParseError(f"{name} must be a number, got {value!r}", field=name)
    if not math.isfinite(result):
        raise ConfigParseError(f"{name} must be finite, got {value!r}", field=name)
    return result


def _int(value: Any, name: str) -> int:
    number = _float(value, name)
    if number != int(number):
        raise ConfigParseError(f"{name} must be an integer, got {value!r}", field=name)
    return int(number)


def _bool(value: Any, name: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigParseError(f"{name} must be true or false", field=name)
    return value


def _optional_str(value: Any, name: str) -> str | None:
    if value is None:
        return None
    if not isinstance(value, str):
        raise ConfigParseError(f"{name} must be a path string", field=name)
    return value


def _vector(value: Any, name: str) -> tuple[float, float, float]:
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigParseError(f"{name} must be [x, y, z] in metres", field=name)
    return tuple(_float(x, name) for x in value)  # type: ignore[return-value]


def _matrix(value: Any, name: str) -> np.ndarray:
    if not isinstance(value, list) or not all(isinstance(row, list) for row in value):
        raise ConfigParseError(f"{name} must be a list of rows", field=name)
    rows = [[_float(x, name) for x in row] for row in value]
    if any(len(row) != len(rows) for row in rows):
        raise ConfigParseError(f"{name} must be square", field=name)
    return np.array(rows, dtype=float)


def _fraction(value: Any) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"multiplier {value!r} must be an integer or 'n/d' string")
    return Fraction(str(value).strip())
