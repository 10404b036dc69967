"""Entanglement graph: masses are nodes, nonzero entangling phases are edges.

Connectivity decides genuine N-body entanglement. GHZ and separability
schedules need exact rational phase ratios, so they take ``RationalPhases``
and never a float matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations
from typing import Sequence

import networkx as nx
import numpy as np

from qgem import closedform
from qgem.bipartition import Bipartition, all_bipartitions
from qgem.errors import ErrorKind, QGEMError
from qgem.geometry import PhaseMatrix

DEFAULT_EPSILON_EDGE = 1e-12
BRUTE_FORCE_MAX_NODES = 16

Edge = tuple[int, int, float]


@dataclass(frozen=True)
class EntanglementGraph:
    n: int
    edges: frozenset[Edge]
    epsilon_edge: float = DEFAULT_EPSILON_EDGE

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return sorted((p, q) for p, q, _ in self.edges)

    def has_edge(self, p: int, q: int) -> bool:
        p, q = min(p, q), max(p, q)
        return any(a == p and b == q for a, b, _ in self.edges)

    def without_edge(self, p: int, q: int) -> EntanglementGraph:
        p, q = min(p, q), max(p, q)
        kept = frozenset(e for e in self.edges if (e[0], e[1]) != (p, q))
        return EntanglementGraph(self.n, kept, self.epsilon_edge)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_weighted_edges_from(self.edges, weight="phi")
        return graph


@dataclass(frozen=True)
class RationalPhases:
    """Phi_pq = multipliers[p][q] * base, with exact rational multipliers."""

    base: float
    multipliers: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if not (math.isfinite(self.base) and self.base > 0):
            raise QGEMError(
                f"Base phase must be positive rad/s, got {self.base!r}",
                kind=ErrorKind.INVALID_PHASES,
            )
        rows = tuple(tuple(Fraction(x) for x in row) for row in self.multipliers)
        n = len(rows)
        if n < 2 or any(len(row) != n for row in rows):
            raise QGEMError(
                "Rational multipliers must form a square matrix with N >= 2",
                kind=ErrorKind.INVALID_PHASES,
            )
        for p in range(n):
            if rows[p][p] != 0:
                raise QGEMError(
                    f"Multiplier diagonal must be zero (mass {p + 1})",
                    kind=ErrorKind.INVALID_PHASES,
                )
            for q in range(p + 1, n):
                if rows[p][q] != rows[q][p]:
                    raise QGEMError(
                        f"Multipliers are not symmetric at ({p + 1}, {q + 1})",
                        kind=ErrorKind.INVALID_PHASES,
                    )
                if rows[p][q] < 0:
                    raise QGEMError(
                        f"Multiplier ({p + 1}, {q + 1}) is negative",
                        kind=ErrorKind.INVALID_PHASES,
                    )
        object.__setattr__(self, "multipliers", rows)

    @classmethod
    def from_pairs(
        cls, n: int, base: float, pairs: dict[tuple[int, int], Fraction | int | str]
    ) -> RationalPhases:
        rows = [[Fraction(0)] * n for _ in range(n)]
        for (p, q), value in pairs.items():
            rows[p][q] = rows[q][p] = Fraction(value)
        return cls(base, tuple(tuple(row) for row in rows))

    @property
    def n(self) -> int:
        return len(self.multipliers)

    def pair_multipliers(self) -> dict[tuple[int, int], Fraction]:
        return {
            (p, q): self.multipliers[p][q] for p, q in combinations(range(self.n), 2)
        }

    def to_phase_matrix(self) -> PhaseMatrix:
        values = np.array(
            [[float(m) * self.base for m in row] for row in self.multipliers]
        )
        return PhaseMatrix(values)


@dataclass
class GenuineVerdict:
    genuine: bool
    witness: Bipartition | None = None
    n_edges: int = 0

    @property
    def minimal_edge_count_met(self) -> bool:
        """At least N-1 nonzero phases; necessary, not sufficient."""
        return self.witness is None or self.n_edges >= self.witness.n - 1


@dataclass
class GHZCondition:
    """Every counted phase is an odd multiple of ``phi``."""

    phi: float
    unit: Fraction  # phi / base
    odd_multipliers: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def first_time(self) -> float:
        return math.pi / self.phi

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.phi

    def time(self, n: int) -> float:
        """The n-th GHZ instant, (2n + 1) pi / phi."""
        return (2 * n + 1) * math.pi / self.phi

    def describe(self) -> str:
        return f"t = (2n+1)*pi/{self.phi:.17g} s, n = 0, 1, 2, ..."


@dataclass
class SeparabilitySchedule:
    """Fully separable at t = m * first_time, m = 0, 1, 2, ..."""

    first_time: float
    period: float
    cycles: Fraction  # first_time * base / (2 pi)


@dataclass
class SustainabilityVerdict:
    status: str  # "sustained" | "not-genuine" | "undetermined"
    reason: str


@dataclass
class BoundReport:
    """Pointwise comparison of one-vs-rest I-concurrence for N and N-1 masses."""

    p1: int
    removed: int
    points: int
    max_violation: float
    extended_points: int
    tolerance: float

    @property
    def holds(self) -> bool:
        return self.max_violation <= self.tolerance


@dataclass
class GHZExperimentReport:
    applicable: bool
    reason: str
    phi: float | None = None
    t: float | None = None
    min_iconcurrence: float | None = None
    worst: Bipartition | None = None


# ---------------------------------------------------------------------------
# Graph construction and connectivity
# ---------------------------------------------------------------------------


def build_graph(
    phases: PhaseMatrix, epsilon_edge: float = DEFAULT_EPSILON_EDGE
) -> EntanglementGraph:
    """Edge (p, q) iff Phi_pq > epsilon_edge."""
    if epsilon_edge < 0:
        raise QGEMError(
            f"epsilon_edge must be >= 0, got {epsilon_edge!r}",
            kind=ErrorKind.INVALID_PHASES,
        )
    edges = frozenset(
        (p, q, float(phases.values[p, q]))
        for p, q in combinations(range(phases.n), 2)
        if phases.values[p, q] > epsilon_edge
    )
    return EntanglementGraph(phases.n, edges, epsilon_edge)


def is_connected(g: EntanglementGraph) -> bool:
    if g.n < 1:
        raise QGEMError("Graph has no nodes", kind=ErrorKind.INVALID_PHASES)
    return nx.is_connected(g.to_networkx())


def connectivity(g: EntanglementGraph) -> int:
    """kappa(G): size of the smallest vertex cut, N-1 for complete graphs.

    Up to 16 nodes every vertex subset is tried (exponential); larger graphs
    use networkx's flow-based node connectivity.
    """
    if not is_connected(g):
        return 0
    graph = g.to_networkx()
    if g.n > BRUTE_FORCE_MAX_NODES:
        return int(nx.node_connectivity(graph))
    nodes = list(range(g.n))
    for size in range(1, g.n - 1):
        for cut in combinations(nodes, size):
            rest = graph.subgraph(set(nodes) - set(cut))
            if not nx.is_connected(rest):
                return size
    return g.n - 1


def predicts_genuine_entanglement(g: EntanglementGraph) -> GenuineVerdict:
    """Connected graph <=> no cut with identically zero I-concurrence.

    A disconnected graph comes with the witness cut: the component of mass 1
    against everything else.
    """
    if g.n < 2:
        raise QGEMError(
            f"Genuine entanglement needs N >= 2, got N={g.n}",
            kind=ErrorKind.WRONG_ARITY,
        )
    if is_connected(g):
        return GenuineVerdict(genuine=True, n_edges=len(g.edges))
    component = nx.node_connected_component(g.to_networkx(), 0)
    return GenuineVerdict(
        genuine=False,
        witness=Bipartition.of(g.n, component),
        n_edges=len(g.edges),
    )


def coupling_signs_balanced(
    phases: PhaseMatrix, epsilon_edge: float = DEFAULT_EPSILON_EDGE
) -> bool:
    """Whether the coupling signs can be made uniform by flipping whole masses.

    When True the absolute-value phases alone fix every entanglement
    quantity; when False the signs matter and closed forms use them.
    """
    graph = build_graph(phases, epsilon_edge)
    return _switchable(graph, phases.signs, 1.0) or _switchable(
        graph, phases.signs, -1.0
    )


# ---------------------------------------------------------------------------
# Rational-phase predicates
# ---------------------------------------------------------------------------


def ghz_condition(
    phases: RationalPhases, require_all_pairs: bool = True
) -> GHZCondition | None:
    """Largest Phi with every counted phase an odd multiple of it, or None.

    Strict mode needs every pair nonzero. Relaxed mode only changes N=3,
    where one zero phase is allowed.
    """
    multipliers = phases.pair_multipliers()
    nonzero = {pair: m for pair, m in multipliers.items() if m != 0}
    zeros = len(multipliers) - len(nonzero)
    if not nonzero:
        return None
    allowed_zeros = 1 if (not require_all_pairs and phases.n == 3) else 0
    if zeros > allowed_zeros:
        return None
    unit = _rational_gcd(nonzero.values())
    odd: dict[tuple[int, int], int] = {}
    for pair, m in nonzero.items():
        ratio = m / unit
        if ratio.denominator != 1 or ratio.numerator % 2 == 0:
            return None
        odd[pair] = ratio.numerator
    return GHZCondition(phi=float(unit) * phases.base, unit=unit, odd_multipliers=odd)


def separability_times(phases: RationalPhases) -> SeparabilitySchedule:
    """Smallest t > 0 with Phi_pq t in 2 pi Z for every nonzero pair."""
    nonzero = [m for m in phases.pair_multipliers().values() if m != 0]
    if not nonzero:
        raise QGEMError(
            "Every entangling phase is zero; the state never entangles",
            kind=ErrorKind.ALL_ZERO_PHASES,
        )
    cycles = 1 / _rational_gcd(nonzero)
    first = 2.0 * math.pi * float(cycles) / phases.base
    return SeparabilitySchedule(first_time=first, period=first, cycles=cycles)


def sustainability(
    g: EntanglementGraph, pairwise_incommensurate: bool = False
) -> SustainabilityVerdict:
    """Symbolic verdict on staying genuinely entangled for all t > 0.

    A cut's I-concurrence vanishes only when every crossing phase times t is
    a multiple of 2 pi; with pairwise incommensurate phases that needs a cut
    crossed by a single edge. Without the marker nothing can be concluded.
    """
    if not is_connected(g):
        return SustainabilityVerdict(
            "not-genuine", "graph is disconnected; some cut never entangles"
        )
    if not pairwise_incommensurate:
        return SustainabilityVerdict(
            "undetermined", "phases are not marked pairwise incommensurate"
        )
    bridges = nx.edge_connectivity(g.to_networkx()) if g.n > 1 else 0
    if bridges >= 2:
        return SustainabilityVerdict(
            "sustained", "every cut is crossed by at least two incommensurate phases"
        )
    return SustainabilityVerdict(
        "undetermined", "some cut is crossed by a single edge and vanishes periodically"
    )


def ghz_experiment(phases: RationalPhases) -> GHZExperimentReport:
    """Evaluate every cut at t = pi/Phi for a connected odd-ratio graph.

    Covers graphs with zero phases, where GHZ behaviour is not guaranteed;
    this reports what happens, it does not predict it.
    """
    nonzero = {pair: m for pair, m in phases.pair_multipliers().items() if m != 0}
    if not nonzero:
        return GHZExperimentReport(False, "every entangling phase is zero")
    matrix = phases.to_phase_matrix()
    if not is_connected(build_graph(matrix, 0.0)):
        return GHZExperimentReport(False, "graph is disconnected")
    unit = _rational_gcd(nonzero.values())
    if any((m / unit).numerator % 2 == 0 for m in nonzero.values()):
        return GHZExperimentReport(False, "nonzero phases are not odd multiples")
    phi = float(unit) * phases.base
    t = math.pi / phi
    values = closedform.all_iconcurrences(matrix, t, all_bipartitions(phases.n))
    worst = min(values, key=lambda bip: values[bip])
    return GHZExperimentReport(
        True,
        "evaluated",
        phi=phi,
        t=t,
        min_iconcurrence=values[worst],
        worst=worst,
    )


# ---------------------------------------------------------------------------
# One-vs-rest bound across N
# ---------------------------------------------------------------------------


def one_vs_rest_bound_check(
    phases: PhaseMatrix,
    p1: int,
    removed: int,
    t_grid: Sequence[float],
    tolerance: float = 1e-12,
    high: float = 0.05,
    low: float = 1e-6,
) -> BoundReport:
    """Check C_{p1|rest}(t) >= C_{p1|rest - removed}(t) on every grid point.

    The second value belongs to the (N-1)-mass system with ``removed``
    deleted, not to a reduced state. ``extended_points`` counts instants where
    the N-mass value exceeds ``high`` while the (N-1)-mass value is below
    ``low``.
    """
    n = phases.n
    if n < 3:
        raise QGEMError(
            f"The bound compares N and N-1 masses and needs N >= 3, got N={n}",
            kind=ErrorKind.WRONG_ARITY,
        )
    for index in (p1, removed):
        if not 0 <= index < n:
            raise QGEMError(
                f"Mass index {index} out of range for N={n}",
                kind=ErrorKind.INDEX_OUT_OF_RANGE,
            )
    if p1 == removed:
        raise QGEMError(
            f"Cannot remove the measured mass {p1 + 1}",
            kind=ErrorKind.INDEX_OUT_OF_RANGE,
        )
    kept = [i for i in range(n) if i != removed]
    reduced_phases = phases.submatrix(kept)
    full_cut = Bipartition.of(n, [p1])
    reduced_cut = Bipartition.of(n - 1, [kept.index(p1)])

    max_violation = -math.inf
    extended = 0
    for t in t_grid:
        full = closedform.iconcurrence(phases, full_cut, t)
        reduced = closedform.iconcurrence(reduced_phases, reduced_cut, t)
        max_violation = max(max_violation, reduced - full)
        if full > high and reduced < low:
            extended += 1
    return BoundReport(
        p1=p1,
        removed=removed,
        points=len(t_grid),
        max_violation=max_violation if len(t_grid) else 0.0,
        extended_points=extended,
        tolerance=tolerance,
    )


# ---------------------------------------------------------------------------
# Internal helpers
# ---------------------------------------------------------------------------


def _rational_gcd(values) -> Fraction:
    """gcd of positive rationals: gcd of numerators over lcm of denominators."""
    values = list(values)
    numerator = reduce(math.gcd, (v.numerator for v in values))
    denominator = reduce(math.lcm, (v.denominator for v in values))
    return Fraction(numerator, denominator)


def _switchable(g: EntanglementGraph, signs: np.ndarray, target: float) -> bool:
    """Is there x in {+1,-1}^N with signs[p, q] == target * x_p * x_q on edges?"""
    graph = g.to_networkx()
    colour: dict[int, float] = {}
    for component in nx.connected_components(graph):
        root = min(component)
        colour[root] = 1.0
        for v, w in nx.bfs_edges(graph, root):
            colour[w] = signs[v, w] * target * colour[v]
    return all(colour[q] == signs[p, q] * target * colour[p] for p, q, _ in g.edges)
