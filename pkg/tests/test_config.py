"""Tests for the config loader."""

from __future__ import annotations

import logging
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from qgem.closedform import TangleConvention
from qgem.config import (
    ConfigError,
    ConfigParseError,
    ConfigValidationError,
    InputMode,
    LoadedConfig,
    load_config,
    parse_config,
    resolve_bipartitions,
)
from qgem.geometry import random_phase_matrix
from qgem.results import Measure

FIXTURES = Path(__file__).parent / "fixtures"


def _phases(n: int = 3, **run) -> dict:
    values = (np.ones((n, n)) - np.eye(n)).tolist()
    return {"mode": "phases", "phase_matrix_rad_per_s": values, "run": run}


def test_load_config_valid():
    config = load_config(FIXTURES / "phases3.json")

    assert isinstance(config, LoadedConfig)
    assert config.mode is InputMode.PHASES
    assert config.n == 3
    assert config.run.engine == "closed"
    assert config.run.engines == ("closed",)
    assert config.run.measures == [Measure.ICONCURRENCE]
    assert config.run.t_end == 4.0
    assert config.run.steps == 5
    assert [b.label for b in config.bipartitions] == ["1|23", "12|3", "13|2"]
    assert config.phases.phase(1, 2) == 1.5


def test_defaults_for_minimal_config():
    config = parse_config(_phases(2))

    assert config.run.engine == "closed"
    assert config.run.steps == 11
    assert config.run.tolerances.compare == 1e-9
    assert config.run.tangle3_interpretation is TangleConvention.UNORDERED
    assert not config.pairwise_incommensurate


def test_geometry_config_builds_phases():
    config = load_config(FIXTURES / "geometry2.json")

    assert config.mode is InputMode.GEOMETRY
    assert config.setup is not None
    assert config.diagnostics.ok
    assert config.diagnostics.min_distance == pytest.approx(3.5e-4)
    assert config.phases.phase(0, 1) > 0
    assert config.run.engines == ("closed", "oracle")


def test_coincident_branches_are_rejected():
    with pytest.raises(ConfigValidationError, match="masses 1-2") as exc_info:
        load_config(FIXTURES / "coincident.json")
    assert any("Coincident" in v for v in exc_info.value.violations)


def test_unassigned_mass_in_bipartition(write_config):
    data = {
        "mode": "phases",
        "random_phases": {"n": 7},
        "run": {"bipartitions": ["17|2345"]},
    }
    with pytest.raises(ConfigValidationError, match="unassigned"):
        load_config(write_config(data))


def test_parse_error_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text(
        '{\n  "mode": "phases",\n  "phase_matrix_rad_per_s": [[0, 1], [1, 0]\n}\n',
        encoding="utf-8",
    )
    with pytest.raises(ConfigParseError) as exc_info:
        load_config(path)

    line = exc_info.value.line
    assert line is not None
    assert f"line {line}" in str(exc_info.value)


def test_missing_file_raises():
    with pytest.raises(ConfigParseError, match="not found"):
        load_config(FIXTURES / "nope.json")


def test_wrong_type_names_the_field():
    with pytest.raises(ConfigParseError) as exc_info:
        parse_config(_phases(steps="many"))
    assert exc_info.value.field == "run.steps"


@pytest.mark.parametrize(
    "data, message",
    [
        ({}, "mode"),
        ({"mode": "orbits"}, "Unknown mode"),
        (_phases(measures=["entropy"]), "Unknown measure"),
        ({"mode": "phases"}, "exactly one of"),
        ({**_phases(), "random_phases": {"n": 3}}, "exactly one of"),
    ],
)
def test_parse_errors(data, message):
    with pytest.raises(ConfigParseError, match=message):
        parse_config(data)


@pytest.mark.parametrize(
    "run, message",
    [
        ({"t_start": 2.0, "t_end": 1.0}, "t_end must exceed"),
        ({"steps": 0}, "steps must be >= 1"),
        ({"engine": "gpu"}, "engine must be one of"),
        ({"workers": 0}, "workers must be >= 1"),
        ({"tolerances": {"compare": 0}}, "compare must be positive"),
    ],
)
def test_run_validation(run, message):
    with pytest.raises(ConfigValidationError, match=message):
        parse_config(_phases(**run))


def test_three_mass_measures_need_three_masses():
    with pytest.raises(ConfigValidationError, match="defined for 3 masses"):
        parse_config(_phases(4, measures=["tangle3"]))


def test_invalid_phase_matrix_becomes_validation_error():
    data = {"mode": "phases", "phase_matrix_rad_per_s": [[0, 1], [2, 0]]}
    with pytest.raises(ConfigValidationError, match="symmetric"):
        parse_config(data)


def test_errors_are_value_errors():
    assert issubclass(ConfigParseError, ConfigError)
    assert issubclass(ConfigValidationError, ConfigError)
    assert issubclass(ConfigError, ValueError)


# ---------------------------------------------------------------------------
# Overrides
# ---------------------------------------------------------------------------


def test_overrides_win_and_none_is_ignored():
    config = load_config(
        FIXTURES / "phases3.json", {"engine": "both", "steps": 9, "t_end": None}
    )

    assert config.run.engine == "both"
    assert config.run.steps == 9
    assert config.run.t_end == 4.0


def test_measures_override_as_comma_string_keeps_output_order():
    config = parse_config(_phases(), {"measures": "pairwise,iconcurrence"})
    assert config.run.measures == [Measure.ICONCURRENCE, Measure.PAIRWISE]


def test_with_run_returns_a_copy():
    config = parse_config(_phases())
    changed = config.with_run(engine="oracle")

    assert changed.run.engine == "oracle"
    assert config.run.engine == "closed"


# ---------------------------------------------------------------------------
# Phase sources
# ---------------------------------------------------------------------------


def test_rational_multipliers_from_strings():
    config = load_config(FIXTURES / "rational3.json")

    assert config.mode is InputMode.RATIONAL
    assert config.rational.multipliers[0][1] == Fraction(3)
    assert config.phases.phase(0, 1) == 3.0
    assert config.phases.phase(1, 2) == 0.0


def test_rational_fractions_and_float_rejection():
    data = {
        "mode": "rational-phases",
        "rational": {"base_rad_per_s": 2.0, "multipliers": [[0, "3/2"], ["3/2", 0]]},
    }
    assert parse_config(data).phases.phase(0, 1) == 3.0

    data["rational"]["multipliers"] = [[0, 1.5], [1.5, 0]]
    with pytest.raises(ConfigParseError) as exc_info:
        parse_config(data)
    assert exc_info.value.field == "rational.multipliers"


def test_random_phases_follow_the_seed():
    first = load_config(FIXTURES / "random4.json")
    second = load_config(FIXTURES / "random4.json")
    expected = random_phase_matrix(4, np.random.default_rng(7))

    np.testing.assert_array_equal(first.phases.values, second.phases.values)
    np.testing.assert_array_equal(first.phases.values, expected.values)


def test_pair_phase_table_keeps_coupling_sign():
    data = {"mode": "phases", "pair_phase_table": {"1-2": [5.0, 0.0, 0.0, 0.0]}}
    config = parse_config(data)

    assert config.phases.phase(0, 1) == 5.0
    assert config.phases.signs[0, 1] == -1.0
    assert config.table.rate(0, 1, 0, 0) == 5.0


def test_pair_phase_table_label_errors():
    data = {"mode": "phases", "pair_phase_table": {"one-two": [0, 1, 0, 0]}}
    with pytest.raises(ConfigParseError, match="'1-2'"):
        parse_config(data)


def test_exponent_only_numbers_in_yaml(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(
        "mode: phases\n"
        "phase_matrix_rad_per_s: [[0, 1e3], [1e3, 0]]\n"
        "run:\n"
        "  t_end: 1e-4\n",
        encoding="utf-8",
    )
    config = load_config(path)

    assert config.phases.phase(0, 1) == 1000.0
    assert config.run.t_end == 1e-4


def test_config_loaded_is_logged(caplog):
    with caplog.at_level(logging.INFO, logger="qgem"):
        load_config(FIXTURES / "phases3.json")

    messages = [r.message for r in caplog.records]
    assert "config.loaded" in messages
    record = next(r for r in caplog.records if r.message == "config.loaded")
    assert record.mode == "phases"
    assert record.n == 3


# ---------------------------------------------------------------------------
# Bipartition selectors
# ---------------------------------------------------------------------------


def test_resolve_bipartitions_selectors():
    assert len(resolve_bipartitions("all", 4)) == 7
    assert [b.label for b in resolve_bipartitions("one-vs-rest", 3)] == [
        "1|23",
        "12|3",
        "13|2",
    ]
    explicit = resolve_bipartitions("34|12, 13|24", 4)
    assert [b.label for b in explicit] == ["12|34", "13|24"]
    assert resolve_bipartitions(["12|34", "34|12"], 4) == explicit[:1]


def test_resolve_bipartitions_uses_semicolons_from_ten_masses():
    found = resolve_bipartitions("1,2|3,4,5,6,7,8,9,10; 1|2,3,4,5,6,7,8,9,10", 10)
    assert [b.label for b in found] == [
        "1|2,3,4,5,6,7,8,9,10",
        "1,2|3,4,5,6,7,8,9,10",
    ]
