"""Physical setup → branch distances → phase rates → entangling phases.

Units are SI throughout. A mass p sits in a superposition of two localised
branches ``|0_p>`` (centred at ``loc0``) and ``|1_p>`` (centred at ``loc1``);
every pair of branches of two different masses picks up the phase rate
``phi = G m_p m_q / (hbar d)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from qgem.errors import ErrorKind, QGEMError

DEFAULT_MIN_PAIR_DISTANCE = 1e-4  # metres
BRANCHES = ((0, 0), (0, 1), (1, 0), (1, 1))

PairKey = tuple[int, int, int, int]  # (p, q, j_p, j_q) with p < q


@dataclass(frozen=True)
class MassSpec:
    """One superposed mass: kilograms plus the two branch centres in metres."""

    mass: float
    loc0: tuple[float, float, float]
    loc1: tuple[float, float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "loc0", _as_point(self.loc0, "loc0"))
        object.__setattr__(self, "loc1", _as_point(self.loc1, "loc1"))
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise QGEMError(
                f"Mass must be a positive finite number of kg, got {self.mass!r}",
                kind=ErrorKind.INVALID_SETUP,
            )
        if self.separation == 0.0:
            raise QGEMError(
                "The two branches of a mass must not coincide (separation is 0)",
                kind=ErrorKind.INVALID_SETUP,
            )

    @property
    def separation(self) -> float:
        return float(np.linalg.norm(np.subtract(self.loc0, self.loc1)))

    def branch(self, j: int) -> np.ndarray:
        return np.asarray(self.loc1 if j else self.loc0, dtype=float)


@dataclass(frozen=True)
class SystemSetup:
    """Ordered masses plus the closest-approach threshold between masses."""

    masses: tuple[MassSpec, ...]
    min_pair_distance: float = DEFAULT_MIN_PAIR_DISTANCE

    def __post_init__(self) -> None:
        object.__setattr__(self, "masses", tuple(self.masses))
        if not (math.isfinite(self.min_pair_distance) and self.min_pair_distance > 0):
            raise QGEMError(
                "min_pair_distance must be a positive number of metres, "
                f"got {self.min_pair_distance!r}",
                kind=ErrorKind.INVALID_SETUP,
            )

    @property
    def n(self) -> int:
        return len(self.masses)


@dataclass(frozen=True)
class PhysicalConstants:
    G: float = 6.674e-11
    hbar: float = 1.054571817e-34

    def __post_init__(self) -> None:
        for name in ("G", "hbar"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise QGEMError(
                    f"Physical constant {name} must be positive, got {value!r}",
                    kind=ErrorKind.INVALID_SETUP,
                )


@dataclass(frozen=True, eq=False)
class PairPhaseTable:
    """Phase rates in rad/s for every pair and branch choice.

    ``rates[p, q, j_p, j_q]`` is stored for both orientations
    (``rates[q, p, j_q, j_p]`` holds the same value); the diagonal blocks
    are zero and never read.
    """

    rates: np.ndarray

    def __post_init__(self) -> None:
        rates = np.array(self.rates, dtype=float)
        if rates.ndim != 4 or rates.shape[0] != rates.shape[1] or rates.shape[2:] != (
            2,
            2,
        ):
            raise QGEMError(
                f"Phase table must have shape (N, N, 2, 2), got {rates.shape}",
                kind=ErrorKind.INVALID_PHASES,
            )
        if rates.shape[0] < 2:
            raise QGEMError(
                "Phase table needs at least 2 masses", kind=ErrorKind.INVALID_PHASES
            )
        if not np.all(np.isfinite(rates)):
            raise QGEMError(
                "Phase table entries must be finite", kind=ErrorKind.INVALID_PHASES
            )
        if not np.array_equal(rates, rates.transpose(1, 0, 3, 2)):
            raise QGEMError(
                "Phase table is not consistent under pair relabelling",
                kind=ErrorKind.INVALID_PHASES,
            )
        rates.setflags(write=False)
        object.__setattr__(self, "rates", rates)

    @classmethod
    def from_pairs(
        cls, n: int, pairs: Mapping[tuple[int, int], Sequence[float]]
    ) -> PairPhaseTable:
        """Build from ``{(p, q): (phi00, phi01, phi10, phi11)}`` with 0-based p < q.

        Pairs that are not listed get all-zero rates.
        """
        rates = np.zeros((n, n, 2, 2))
        for (p, q), values in pairs.items():
            if not (0 <= p < n and 0 <= q < n and p != q):
                raise QGEMError(
                    f"Pair ({p + 1}, {q + 1}) is not valid for {n} masses",
                    kind=ErrorKind.INVALID_PHASES,
                )
            if len(values) != 4:
                raise QGEMError(
                    f"Pair ({p + 1}, {q + 1}) needs 4 rates, got {len(values)}",
                    kind=ErrorKind.INVALID_PHASES,
                )
            block = np.asarray(values, dtype=float).reshape(2, 2)
            if p > q:
                p, q, block = q, p, block.T
            rates[p, q] = block
            rates[q, p] = block.T
        return cls(rates)

    @classmethod
    def from_phase_matrix(cls, phases: PhaseMatrix) -> PairPhaseTable:
        """A table realising ``phases``: phi01 = Phi (or phi00 = Phi for a
        negative coupling sign), every other rate zero."""
        pairs = {}
        for p, q in combinations(range(phases.n), 2):
            value = float(phases.values[p, q])
            if phases.signs[p, q] >= 0:
                pairs[(p, q)] = (0.0, value, 0.0, 0.0)
            else:
                pairs[(p, q)] = (value, 0.0, 0.0, 0.0)
        return cls.from_pairs(phases.n, pairs)

    @property
    def n(self) -> int:
        return int(self.rates.shape[0])

    def rate(self, p: int, q: int, j_p: int, j_q: int) -> float:
        return float(self.rates[p, q, j_p, j_q])

    def subsystem(self, indices: Sequence[int]) -> PairPhaseTable:
        idx = np.asarray(indices, dtype=int)
        return PairPhaseTable(self.rates[np.ix_(idx, idx)])

    def shifted(self, offset: float) -> PairPhaseTable:
        """Every off-diagonal rate shifted by ``offset`` (a global phase)."""
        rates = np.array(self.rates)
        mask = ~np.eye(self.n, dtype=bool)
        rates[mask] += offset
        return PairPhaseTable(rates)


@dataclass(frozen=True, eq=False)
class PhaseMatrix:
    """Symmetric matrix of entangling phases Phi_pq in rad/s, zero diagonal.

    ``signs`` records the sign of the un-rectified coupling
    phi01 + phi10 - phi00 - phi11 for each pair (+1 when not known).
    """

    values: np.ndarray
    signs: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise QGEMError(
                f"Phase matrix must be square, got shape {values.shape}",
                kind=ErrorKind.INVALID_PHASES,
            )
        n = values.shape[0]
        if n < 1:
            raise QGEMError("Phase matrix is empty", kind=ErrorKind.INVALID_PHASES)
        if not np.all(np.isfinite(values)):
            raise QGEMError(
                "Phase matrix entries must be finite", kind=ErrorKind.INVALID_PHASES
            )
        if np.any(np.diag(values) != 0):
            raise QGEMError(
                "Phase matrix diagonal must be zero", kind=ErrorKind.INVALID_PHASES
            )
        if np.any(values < 0):
            raise QGEMError(
                "Entangling phases must be nonnegative", kind=ErrorKind.INVALID_PHASES
            )
        scale = max(1.0, float(np.max(values)))
        if not np.allclose(values, values.T, rtol=0.0, atol=1e-12 * scale):
            raise QGEMError(
                "Phase matrix must be symmetric", kind=ErrorKind.INVALID_PHASES
            )
        values = (values + values.T) / 2
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

        if self.signs is None:
            signs = np.ones((n, n))
        else:
            signs = np.array(self.signs, dtype=float)
            if signs.shape != (n, n) or not np.all(np.abs(signs) == 1):
                raise QGEMError(
                    "Phase signs must be an N x N matrix of +1/-1",
                    kind=ErrorKind.INVALID_PHASES,
                )
            if not np.array_equal(signs, signs.T):
                raise QGEMError(
                    "Phase signs must be symmetric", kind=ErrorKind.INVALID_PHASES
                )
        signs.setflags(write=False)
        object.__setattr__(self, "signs", signs)

    @classmethod
    def from_values(
        cls,
        values: Sequence[Sequence[float]],
        signs: Sequence[Sequence[float]] | None = None,
    ) -> PhaseMatrix:
        return cls(np.asarray(values, dtype=float), signs)

    @classmethod
    def from_pairs(cls, n: int, pairs: Mapping[tuple[int, int], float]) -> PhaseMatrix:
        """Build from ``{(p, q): Phi}`` with 0-based indices; others are zero."""
        values = np.zeros((n, n))
        for (p, q), phi in pairs.items():
            values[p, q] = values[q, p] = phi
        return cls(values)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def signed(self) -> np.ndarray:
        return self.values * self.signs

    def phase(self, p: int, q: int) -> float:
        return float(self.values[p, q])

    def submatrix(self, indices: Sequence[int]) -> PhaseMatrix:
        idx = np.asarray(indices, dtype=int)
        grid = np.ix_(idx, idx)
        return PhaseMatrix(self.values[grid], self.signs[grid])

    def min_nonzero(self, epsilon: float = 0.0) -> float | None:
        nonzero = self.values[self.values > epsilon]
        return float(nonzero.min()) if nonzero.size else None


@dataclass
class SetupViolation:
    """One problem found by validate_setup()."""

    kind: str  # "arity" | "coincident" | "threshold"
    message: str
    pair: tuple[int, int] | None = None  # 0-based
    branches: tuple[int, int] | None = None
    distance: float | None = None


@dataclass
class SetupDiagnostics:
    n: int
    min_pair_distance: float
    violations: list[SetupViolation] = field(default_factory=list)
    min_distance: float | None = None
    closest: PairKey | None = None

    @property
    def ok(self) -> bool:
        return not self.violations


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def validate_setup(setup: SystemSetup) -> SetupDiagnostics:
    """Report every violation without raising."""
    report = SetupDiagnostics(n=setup.n, min_pair_distance=setup.min_pair_distance)
    if setup.n < 2:
        report.violations.append(
            SetupViolation(kind="arity", message=f"N >= 2 required, got N={setup.n}")
        )
        return report

    for (p, q, j_p, j_q), d in _raw_distances(setup).items():
        if report.min_distance is None or d < report.min_distance:
            report.min_distance = d
            report.closest = (p, q, j_p, j_q)
        where = f"masses {p + 1}-{q + 1} branches {j_p}{j_q}"
        if d == 0.0:
            report.violations.append(
                SetupViolation(
                    kind="coincident",
                    message=f"Coincident branch centres for {where}",
                    pair=(p, q),
                    branches=(j_p, j_q),
                    distance=d,
                )
            )
        elif d < setup.min_pair_distance:
            report.violations.append(
                SetupViolation(
                    kind="threshold",
                    message=(
                        f"Distance {d:.6g} m for {where} is below the "
                        f"{setup.min_pair_distance:.6g} m threshold"
                    ),
                    pair=(p, q),
                    branches=(j_p, j_q),
                    distance=d,
                )
            )
    return report


def pairwise_distances(setup: SystemSetup) -> dict[PairKey, float]:
    """All 4·C(N,2) cross-mass branch distances, keyed ``(p, q, j_p, j_q)``."""
    if setup.n < 2:
        raise QGEMError(
            f"N >= 2 required, got N={setup.n}", kind=ErrorKind.INVALID_SETUP
        )
    distances = _raw_distances(setup)
    for (p, q, j_p, j_q), d in distances.items():
        if d == 0.0:
            raise QGEMError(
                f"Branch {j_p} of mass {p + 1} coincides with branch {j_q} of "
                f"mass {q + 1}",
                kind=ErrorKind.ZERO_DISTANCE,
                context={"pair": (p + 1, q + 1), "branches": (j_p, j_q)},
            )
        if d < setup.min_pair_distance:
            raise QGEMError(
                f"Distance {d:.6g} m between mass {p + 1} branch {j_p} and mass "
                f"{q + 1} branch {j_q} is below {setup.min_pair_distance:.6g} m",
                kind=ErrorKind.THRESHOLD_VIOLATION,
                context={"pair": (p + 1, q + 1), "branches": (j_p, j_q)},
            )
    return distances


def phase_table(
    setup: SystemSetup, constants: PhysicalConstants | None = None
) -> PairPhaseTable:
    """phi_{j_p j_q} = G m_p m_q / (hbar d_{j_p j_q}) for every pair."""
    constants = constants or PhysicalConstants()
    distances = pairwise_distances(setup)
    rates = np.zeros((setup.n, setup.n, 2, 2))
    for (p, q, j_p, j_q), d in distances.items():
        m_p, m_q = setup.masses[p].mass, setup.masses[q].mass
        rate = constants.G * m_p * m_q / (constants.hbar * d)
        rates[p, q, j_p, j_q] = rate
        rates[q, p, j_q, j_p] = rate
    return PairPhaseTable(rates)


def entangling_phases(table: PairPhaseTable) -> PhaseMatrix:
    """Phi_pq = |phi01 + phi10 - phi00 - phi11|, keeping the sign separately."""
    r = table.rates
    coupling = r[:, :, 0, 1] + r[:, :, 1, 0] - r[:, :, 0, 0] - r[:, :, 1, 1]
    np.fill_diagonal(coupling, 0.0)
    signs = np.where(coupling < 0, -1.0, 1.0)
    return PhaseMatrix(np.abs(coupling), signs)


def random_phase_matrix(
    n: int, rng: np.random.Generator, low: float = 0.0, high: float = 5.0
) -> PhaseMatrix:
    """Entries drawn uniformly from ``[low, high)`` rad/s, upper triangle mirrored."""
    values = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    values[iu] = rng.uniform(low, high, size=len(iu[0]))
    return PhaseMatrix(values + values.T)


def _raw_distances(setup: SystemSetup) -> dict[PairKey, float]:
    distances: dict[PairKey, float] = {}
    for p, q in combinations(range(setup.n), 2):
        for j_p, j_q in BRANCHES:
            delta = setup.masses[p].branch(j_p) - setup.masses[q].branch(j_q)
            d = float(np.linalg.norm(delta))
            distances[(p, q, j_p, j_q)] = d
    return distances


def _as_point(value: Sequence[float], name: str) -> tuple[float, float, float]:
    point = tuple(float(x) for x in value)
    if len(point) != 3 or not all(math.isfinite(x) for x in point):
        raise QGEMError(
            f"{name} must be a finite 3-vector in metres, got {value!r}",
            kind=ErrorKind.INVALID_SETUP,
        )
    return point  # type: ignore[return-value]
