"""Setup validation, branch distances, phase tables and entangling phases."""

from __future__ import annotations

import math

import numpy as np
import pytest

from qgem.errors import ErrorKind, QGEMError
from qgem.geometry import (
    MassSpec,
    PairPhaseTable,
    PhaseMatrix,
    PhysicalConstants,
    SystemSetup,
    entangling_phases,
    pairwise_distances,
    phase_table,
    random_phase_matrix,
    validate_setup,
)

C = PhysicalConstants()


def _collinear(m: float = 1e-14) -> SystemSetup:
    return SystemSetup(
        (
            MassSpec(m, (0.0, 0.0, 0.0), (1e-4, 0.0, 0.0)),
            MassSpec(m, (4.5e-4, 0.0, 0.0), (5.5e-4, 0.0, 0.0)),
        )
    )


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------


def test_collinear_distances():
    d = pairwise_distances(_collinear())

    assert d[(0, 1, 0, 0)] == pytest.approx(4.5e-4)
    assert d[(0, 1, 0, 1)] == pytest.approx(5.5e-4)
    assert d[(0, 1, 1, 0)] == pytest.approx(3.5e-4)
    assert d[(0, 1, 1, 1)] == pytest.approx(4.5e-4)


def test_distance_count_is_four_per_pair():
    setup = SystemSetup(
        tuple(
            MassSpec(1e-14, (x, 0.0, 0.0), (x, 2e-4, 0.0))
            for x in (0.0, 1e-3, 2e-3, 3e-3)
        )
    )
    d = pairwise_distances(setup)

    assert len(d) == 4 * 6
    assert all(v > 0 for v in d.values())


def test_coincident_branches_raise_zero_distance():
    setup = SystemSetup(
        (
            MassSpec(1e-14, (0.0, 0.0, 0.0), (1e-3, 0.0, 0.0)),
            MassSpec(1e-14, (1e-3, 0.0, 0.0), (2e-3, 0.0, 0.0)),
        )
    )
    with pytest.raises(QGEMError) as exc_info:
        pairwise_distances(setup)

    assert exc_info.value.kind is ErrorKind.ZERO_DISTANCE
    assert exc_info.value.context["pair"] == (1, 2)
    assert exc_info.value.context["branches"] == (1, 0)


def test_close_branches_raise_threshold_violation():
    setup = SystemSetup(
        (
            MassSpec(1e-14, (0.0, 0.0, 0.0), (1e-4, 0.0, 0.0)),
            MassSpec(1e-14, (1.5e-4, 0.0, 0.0), (1e-3, 0.0, 0.0)),
        )
    )
    with pytest.raises(QGEMError) as exc_info:
        pairwise_distances(setup)

    assert exc_info.value.kind is ErrorKind.THRESHOLD_VIOLATION


def test_single_mass_is_invalid_setup():
    setup = SystemSetup((MassSpec(1.0, (0.0, 0.0, 0.0), (1.0, 0.0, 0.0)),))
    with pytest.raises(QGEMError) as exc_info:
        pairwise_distances(setup)
    assert exc_info.value.kind is ErrorKind.INVALID_SETUP


def test_mass_spec_rejects_bad_input():
    with pytest.raises(QGEMError, match="positive"):
        MassSpec(-1.0, (0.0, 0.0, 0.0), (1.0, 0.0, 0.0))
    with pytest.raises(QGEMError, match="coincide"):
        MassSpec(1.0, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    with pytest.raises(QGEMError, match="3-vector"):
        MassSpec(1.0, (0.0, 0.0), (1.0, 0.0, 0.0))


# ---------------------------------------------------------------------------
# validate_setup
# ---------------------------------------------------------------------------


def test_validate_setup_ok_reports_min_distance():
    report = validate_setup(_collinear())

    assert report.ok
    assert report.violations == []
    assert report.min_distance == pytest.approx(3.5e-4)
    assert report.closest == (0, 1, 1, 0)


def test_validate_setup_lists_one_threshold_violation():
    setup = SystemSetup(
        (
            MassSpec(1e-14, (0.0, 0.0, 0.0), (1e-4, 0.0, 0.0)),
            MassSpec(1e-14, (1.5e-4, 0.0, 0.0), (1e-3, 0.0, 0.0)),
        )
    )
    report = validate_setup(setup)

    assert not report.ok
    assert len(report.violations) == 1
    violation = report.violations[0]
    assert violation.kind == "threshold"
    assert violation.pair == (0, 1)
    assert violation.branches == (1, 0)
    assert "masses 1-2" in violation.message


def test_validate_setup_flags_single_mass():
    setup = SystemSetup((MassSpec(1.0, (0.0, 0.0, 0.0), (1.0, 0.0, 0.0)),))
    report = validate_setup(setup)

    assert not report.ok
    assert "N >= 2 required" in report.violations[0].message


# ---------------------------------------------------------------------------
# Phase rates
# ---------------------------------------------------------------------------


def test_unit_masses_at_g_over_hbar_give_one_rad_per_s():
    d = C.G / C.hbar
    setup = SystemSetup(
        (
            MassSpec(1.0, (0.0, 0.0, 0.0), (0.0, 3 * d, 0.0)),
            MassSpec(1.0, (d, 0.0, 0.0), (d, -3 * d, 0.0)),
        )
    )
    table = phase_table(setup)

    assert table.rate(0, 1, 0, 0) == pytest.approx(1.0, rel=1e-12)


def test_doubling_distance_halves_rate():
    near = phase_table(_collinear())
    far_setup = SystemSetup(
        (
            MassSpec(1e-14, (0.0, 0.0, 0.0), (1e-4, 0.0, 0.0)),
            MassSpec(1e-14, (9e-4, 0.0, 0.0), (5.5e-4, 0.0, 0.0)),
        )
    )
    far = phase_table(far_setup)

    assert far.rate(0, 1, 0, 0) == pytest.approx(near.rate(0, 1, 0, 0) / 2)
    assert far.rate(0, 1, 1, 1) == pytest.approx(near.rate(0, 1, 0, 1) * 5.5 / 4.5)


def test_phase_table_matches_direct_formula_and_is_symmetric():
    m = 1e-14
    table = phase_table(_collinear(m))
    coupling = C.G * m * m / C.hbar

    assert table.rate(0, 1, 0, 0) == pytest.approx(coupling / 4.5e-4)
    assert table.rate(0, 1, 0, 1) == pytest.approx(coupling / 5.5e-4)
    assert table.rate(0, 1, 1, 0) == pytest.approx(coupling / 3.5e-4)
    assert table.rate(0, 1, 1, 1) == pytest.approx(coupling / 4.5e-4)
    assert table.rate(1, 0, 0, 1) == table.rate(0, 1, 1, 0)


def test_entangling_phase_of_collinear_setup():
    m = 1e-14
    phases = entangling_phases(phase_table(_collinear(m)))
    expected = (C.G * m * m / C.hbar) * abs(1 / 5.5e-4 + 1 / 3.5e-4 - 2 / 4.5e-4)

    assert phases.phase(0, 1) == pytest.approx(expected)
    assert phases.phase(1, 0) == phases.phase(0, 1)
    assert phases.signs[0, 1] == 1.0


def test_equal_rates_cancel():
    table = PairPhaseTable.from_pairs(2, {(0, 1): (2.0, 2.0, 2.0, 2.0)})
    assert entangling_phases(table).phase(0, 1) == 0.0


def test_symmetric_pattern_gives_twice_difference():
    a, b = 3.0, 1.25
    table = PairPhaseTable.from_pairs(2, {(0, 1): (b, a, a, b)})
    assert entangling_phases(table).phase(0, 1) == pytest.approx(2 * abs(a - b))


def test_negative_coupling_keeps_sign():
    table = PairPhaseTable.from_pairs(2, {(0, 1): (5.0, 0.0, 0.0, 0.0)})
    phases = entangling_phases(table)

    assert phases.phase(0, 1) == 5.0
    assert phases.signs[0, 1] == -1.0
    assert phases.signed[0, 1] == -5.0


def test_global_shift_leaves_entangling_phases_unchanged(rng):
    pairs = {
        (p, q): tuple(rng.uniform(0, 5, size=4))
        for p in range(4)
        for q in range(p + 1, 4)
    }
    table = PairPhaseTable.from_pairs(4, pairs)

    base = entangling_phases(table)
    shifted = entangling_phases(table.shifted(3.7))

    np.testing.assert_allclose(shifted.values, base.values, atol=1e-12)


def test_from_phase_matrix_round_trips_values_and_signs():
    phases = PhaseMatrix.from_values(
        [[0, 1.0, 2.0], [1.0, 0, 0.5], [2.0, 0.5, 0]],
        signs=[[1, -1, 1], [-1, 1, 1], [1, 1, 1]],
    )
    recovered = entangling_phases(PairPhaseTable.from_phase_matrix(phases))

    np.testing.assert_array_equal(recovered.values, phases.values)
    np.testing.assert_array_equal(recovered.signs, phases.signs)


def test_pair_table_rejects_inconsistent_orientation():
    rates = np.zeros((2, 2, 2, 2))
    rates[0, 1, 0, 1] = 1.0
    with pytest.raises(QGEMError) as exc_info:
        PairPhaseTable(rates)
    assert exc_info.value.kind is ErrorKind.INVALID_PHASES


# ---------------------------------------------------------------------------
# PhaseMatrix
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "values, message",
    [
        ([[0, 1], [2, 0]], "symmetric"),
        ([[0, -1], [-1, 0]], "nonnegative"),
        ([[1, 1], [1, 0]], "diagonal"),
        ([[0, 1, 2], [1, 0, 3]], "square"),
    ],
)
def test_phase_matrix_validation(values, message):
    with pytest.raises(QGEMError, match=message):
        PhaseMatrix.from_values(values)


def test_submatrix_keeps_signs():
    phases = PhaseMatrix.from_values(
        [[0, 1.0, 2.0], [1.0, 0, 3.0], [2.0, 3.0, 0]],
        signs=[[1, 1, -1], [1, 1, 1], [-1, 1, 1]],
    )
    sub = phases.submatrix([0, 2])

    assert sub.phase(0, 1) == 2.0
    assert sub.signs[0, 1] == -1.0


def test_min_nonzero():
    phases = PhaseMatrix.from_pairs(3, {(0, 1): 0.5, (1, 2): 2.0})
    assert phases.min_nonzero() == 0.5
    assert PhaseMatrix(np.zeros((3, 3))).min_nonzero() is None


def test_random_phase_matrix_is_seeded_and_in_range():
    a = random_phase_matrix(5, np.random.default_rng(3))
    b = random_phase_matrix(5, np.random.default_rng(3))

    np.testing.assert_array_equal(a.values, b.values)
    off = a.values[~np.eye(5, dtype=bool)]
    assert np.all((off >= 0) & (off < 5))
    np.testing.assert_array_equal(a.values, a.values.T)


# ---------------------------------------------------------------------------
# Invariances
# ---------------------------------------------------------------------------


def _triangle() -> SystemSetup:
    return SystemSetup(
        (
            MassSpec(1e-14, (0.0, 0.0, 0.0), (2e-4, 0.0, 0.0)),
            MassSpec(2e-14, (6e-4, 1e-4, 0.0), (6e-4, 3e-4, 0.0)),
            MassSpec(1.5e-14, (2e-4, 8e-4, 1e-4), (3e-4, 9e-4, 2e-4)),
        )
    )


def _moved(setup: SystemSetup, rotation: np.ndarray, shift: np.ndarray) -> SystemSetup:
    def place(point):
        return tuple(rotation @ np.asarray(point) + shift)

    return SystemSetup(
        tuple(MassSpec(m.mass, place(m.loc0), place(m.loc1)) for m in setup.masses),
        setup.min_pair_distance,
    )


def _rotation(axis, angle: float) -> np.ndarray:
    k = np.asarray(axis, dtype=float) / np.linalg.norm(axis)
    cross = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * cross + (1 - math.cos(angle)) * cross @ cross


def test_rigid_motion_preserves_distances_and_phases():
    setup = _triangle()
    moved = _moved(setup, _rotation((1, 2, 3), 0.7), np.array([3e-3, -1e-3, 5e-4]))

    before, after = pairwise_distances(setup), pairwise_distances(moved)
    assert before.keys() == after.keys()
    for key, d in before.items():
        assert after[key] == pytest.approx(d, rel=1e-12)

    np.testing.assert_allclose(
        phase_table(moved, C).rates, phase_table(setup, C).rates, rtol=1e-12
    )
    original = entangling_phases(phase_table(setup, C))
    np.testing.assert_allclose(
        entangling_phases(phase_table(moved, C)).values,
        original.values,
        rtol=1e-9,
        atol=1e-12 * float(original.values.max()),
    )


def test_swapping_branch_labels_keeps_entangling_phases():
    setup = _triangle()
    first = setup.masses[0]
    swapped = SystemSetup(
        (MassSpec(first.mass, first.loc1, first.loc0), *setup.masses[1:]),
        setup.min_pair_distance,
    )
    original = entangling_phases(phase_table(setup, C))
    relabelled = entangling_phases(phase_table(swapped, C))

    np.testing.assert_allclose(relabelled.values, original.values, rtol=1e-12)
    assert relabelled.signs[0, 1] == -original.signs[0, 1]
    assert relabelled.signs[0, 2] == -original.signs[0, 2]
    assert relabelled.signs[1, 2] == original.signs[1, 2]
