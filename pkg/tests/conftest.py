"""Shared pytest fixtures for qgem tests."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from qgem.geometry import PhaseMatrix

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def equal_phases3():
    """N=3, every Phi = 1 rad/s; GHZ-equivalent at t = pi."""
    return PhaseMatrix.from_pairs(3, {(0, 1): 1.0, (0, 2): 1.0, (1, 2): 1.0})


@pytest.fixture
def write_config(tmp_path):
    """Dump a config dict to JSON and return its path."""

    def _write(data: dict, name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data, indent=2), encoding="utf-8")
        return path

    return _write
