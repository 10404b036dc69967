"""Analytic entanglement measures as functions of the phase matrix and time.

All functions are pure. Mass indices are 0-based. Every I-concurrence goes
through the Lambda series, evaluated on the smaller side of the cut::

    C(t) = sqrt((2^k - 1) / 2^(k-1) - 2^(2-k) * Lambda(t))

The cosine arguments use the signed couplings (``PhaseMatrix.signed``); with
the default all-positive signs this is the absolute-value series.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations, product
from typing import Iterable

import numpy as np

from qgem import oracle
from qgem.bipartition import Bipartition, k_subsets
from qgem.errors import ErrorKind, QGEMError
from qgem.geometry import PairPhaseTable, PhaseMatrix

CLAMP_TOLERANCE = 1e-12
RADICAND_TOLERANCE = 1e-9
_REDUCE_ABOVE = 1e8
_TWO_PI = 2.0 * math.pi


class TangleConvention(enum.Enum):
    """Reading of the p != q != r sums in the published 3-tangle formula."""

    UNORDERED = "unordered-3-terms"  # one term per apex p, (q, r) ascending
    ORDERED = "ordered-6-terms"  # every permutation of (p, q, r)


@dataclass(frozen=True)
class PublishedTangle:
    """Published 3-tangle evaluation next to the authoritative residual."""

    value: float
    convention: TangleConvention
    oracle_residual: float
    difference: float
    valid: bool


# ---------------------------------------------------------------------------
# Two- and three-body
# ---------------------------------------------------------------------------


def concurrence_two_body(phi12: float, t: float) -> float:
    """|sin(Phi t / 2)|, the concurrence of the two-mass state."""
    return float(abs(math.sin(_reduce(phi12 * t) / 2.0)))


def concurrence_three_body(phases: PhaseMatrix, p: int, t: float) -> float:
    """Concurrence across p|qr: sqrt(1 - cos^2(Phi_pq t/2) cos^2(Phi_pr t/2))."""
    _require_arity(phases, 3)
    _require_index(phases, p)
    others = [b for b in range(3) if b != p]
    half = phases.values[p, others] * t / 2.0
    return float(math.sqrt(_one_minus_prod_cos2(half)))


def three_body_concurrences(phases: PhaseMatrix, t: float) -> tuple[float, ...]:
    return tuple(concurrence_three_body(phases, p, t) for p in range(3))


def schmidt_pair(phases: PhaseMatrix, p: int, t: float) -> tuple[float, float]:
    """Schmidt coefficients (lambda+, lambda-) of the p|qr split.

    |eta| = |cos(Phi_pq t/2) cos(Phi_pr t/2)| / 2 and lambda+- = sqrt(1/2 +- |eta|).
    """
    _require_arity(phases, 3)
    _require_index(phases, p)
    others = [b for b in range(3) if b != p]
    c = float(np.prod(np.abs(np.cos(_reduce(phases.values[p, others] * t) / 2.0))))
    return math.sqrt((1.0 + c) / 2.0), math.sqrt(max(0.0, (1.0 - c) / 2.0))


# ---------------------------------------------------------------------------
# N-body
# ---------------------------------------------------------------------------


def lambda_series(phases: PhaseMatrix, bip: Bipartition, t: float) -> float:
    """Lambda(t) for the cut, summed over l-subsets of the smaller part.

    Term l carries 2^(l-1) sign vectors per subset; the first subset element
    always enters with +.
    """
    _require_bipartition(phases, bip)
    small, large = bip.smaller_side()
    cross = phases.signed[np.ix_(small, large)]
    half_t = t / 2.0
    total = 0.0
    for l in range(1, len(small) + 1):
        signs = _sign_vectors(l)
        term = 0.0
        for subset in combinations(range(len(small)), l):
            args = signs @ cross[list(subset)] * half_t
            term += float(np.sum(np.prod(_cos2(args), axis=1)))
        total += term / 2.0**l
    return total


def lambda_max(k: int) -> float:
    """Lambda at t = 0, where every cosine is 1."""
    return (2.0**k - 1.0) / 2.0


def iconcurrence(
    phases: PhaseMatrix,
    bip: Bipartition,
    t: float,
    tolerance: float = RADICAND_TOLERANCE,
) -> float:
    """I-concurrence across ``bip`` at time ``t``."""
    _require_bipartition(phases, bip)
    small, large = bip.smaller_side()
    if len(small) == 1:
        half = phases.values[small[0], list(large)] * t / 2.0
        return float(math.sqrt(_one_minus_prod_cos2(half)))
    k = len(small)
    radicand = (2.0**k - 1.0) / 2.0 ** (k - 1) - 2.0 ** (2 - k) * lambda_series(
        phases, bip, t
    )
    return _sqrt_clamped(radicand, f"I-concurrence {bip.label}", tolerance)


def all_iconcurrences(
    phases: PhaseMatrix, t: float, bipartitions: Iterable[Bipartition]
) -> dict[Bipartition, float]:
    return {bip: iconcurrence(phases, bip, t) for bip in bipartitions}


def meyer_wallach_qk(phases: PhaseMatrix, k: int, t: float) -> float:
    """Q_k from the average squared I-concurrence over all C(N, k) k-subsets.

    For k = N/2 each split is visited from both sides, matching the subset sum.
    """
    n = phases.n
    if not 1 <= k <= n // 2:
        raise QGEMError(
            f"k must satisfy 1 <= k <= {n // 2} for N={n}, got k={k}",
            kind=ErrorKind.K_OUT_OF_RANGE,
        )
    total = 0.0
    count = 0
    for subset in k_subsets(n, k):
        total += iconcurrence(phases, Bipartition.of(n, subset), t) ** 2
        count += 1
    value = (2.0**k / (2.0 * (2.0**k - 1.0))) * total / count
    return min(max(value, 0.0), 1.0)


def two_body_period(phi: float) -> float:
    """Oscillation period 2 pi / Phi of a single pair (inf when Phi = 0)."""
    return _TWO_PI / phi if phi > 0 else math.inf


# ---------------------------------------------------------------------------
# Three-body tangles
# ---------------------------------------------------------------------------


def three_tangle_published(
    phases: PhaseMatrix,
    t: float,
    convention: TangleConvention = TangleConvention.UNORDERED,
    tolerance: float = RADICAND_TOLERANCE,
) -> PublishedTangle:
    """(1/16)|f1 - 2 f2 + 8 f3| under one reading of its index sets.

    Not authoritative: the value is returned with the oracle residual and a
    ``valid`` flag that is set only when the two agree within ``tolerance``.
    """
    _require_arity(phases, 3)
    phi = phases.values
    triples = _tangle_triples(convention)
    f1 = 1.0 + sum(np.exp(2j * (phi[p, q] + phi[p, r]) * t) for p, q, r in triples)
    f2 = sum(np.exp(1j * (phi[p, q] + phi[p, r]) * t) for p, q, r in triples) + sum(
        np.exp(1j * (2 * phi[p, q] + phi[p, r] + phi[q, r]) * t) for p, q, r in triples
    )
    f3 = sum(np.exp(1j * phi[p, q] * t) for p, q in combinations(range(3), 2))
    value = float(abs(f1 - 2.0 * f2 + 8.0 * f3) / 16.0)

    state = oracle.evolve(PairPhaseTable.from_phase_matrix(phases), t)
    residual = oracle.three_tangle_residual(state, 0)
    difference = abs(value - residual)
    return PublishedTangle(
        value=value,
        convention=convention,
        oracle_residual=residual,
        difference=difference,
        valid=difference < tolerance,
    )


def pairwise_concurrence(
    phases: PhaseMatrix,
    p: int,
    q: int,
    t: float,
    tau123: float,
    tolerance: float = RADICAND_TOLERANCE,
) -> float:
    """C_pq = (1/sqrt 2) sqrt(tau_p|qr + tau_q|pr - tau_r|pq - tau_123).

    ``tau123`` comes from the caller; the oracle residual is the trusted source.
    Only negative radicands down to ``-tolerance`` are read as zero; small
    positive ones are kept, so concurrences far below 1e-6 survive.
    """
    _require_arity(phases, 3)
    _require_index(phases, p)
    _require_index(phases, q)
    if p == q:
        raise QGEMError(
            f"Pairwise concurrence needs two distinct masses, got {p + 1} twice",
            kind=ErrorKind.INDEX_OUT_OF_RANGE,
        )
    (r,) = {0, 1, 2} - {p, q}
    tau = {x: concurrence_three_body(phases, x, t) ** 2 for x in (p, q, r)}
    radicand = (tau[p] + tau[q] - tau[r] - tau123) / 2.0
    return _sqrt_clamped(radicand, f"pairwise concurrence {p + 1}-{q + 1}", tolerance)


# ---------------------------------------------------------------------------
# Internal helpers
# ---------------------------------------------------------------------------


def _reduce(args: np.ndarray | float) -> np.ndarray | float:
    """Wrap arguments into [0, 2 pi) only once they are large."""
    if isinstance(args, np.ndarray):
        return np.where(np.abs(args) > _REDUCE_ABOVE, np.mod(args, _TWO_PI), args)
    return math.fmod(args, _TWO_PI) if abs(args) > _REDUCE_ABOVE else args


def _cos2(args: np.ndarray) -> np.ndarray:
    # cos^2 has period pi, so reducing the half-angle mod 2 pi is safe
    return np.cos(_reduce(args)) ** 2


def _one_minus_prod_cos2(half_args: np.ndarray) -> float:
    """1 - prod cos^2(x) = -expm1(sum log1p(-sin^2 x)); exact near zero."""
    s2 = np.sin(_reduce(np.asarray(half_args, dtype=float))) ** 2
    with np.errstate(divide="ignore"):
        value = -math.expm1(float(np.sum(np.log1p(-s2))))
    return min(max(value, 0.0), 1.0)


def _sqrt_clamped(radicand: float, what: str, tolerance: float) -> float:
    if radicand < -tolerance:
        raise QGEMError(
            f"Negative radicand {radicand:.3e} while evaluating {what}",
            kind=ErrorKind.NEGATIVE_RADICAND,
        )
    return math.sqrt(max(radicand, 0.0))


@lru_cache(maxsize=None)
def _sign_vectors(l: int) -> np.ndarray:
    rows = [
        (1.0, *((-1.0) ** s for s in bits)) for bits in product((0, 1), repeat=l - 1)
    ]
    signs = np.array(rows, dtype=float).reshape(2 ** (l - 1), l)
    signs.setflags(write=False)
    return signs


def _tangle_triples(convention: TangleConvention) -> list[tuple[int, int, int]]:
    if convention is TangleConvention.ORDERED:
        return list(permutations(range(3)))
    return [(p, *sorted({0, 1, 2} - {p})) for p in range(3)]  # type: ignore[misc]


def _require_arity(phases: PhaseMatrix, n: int) -> None:
    if phases.n != n:
        raise QGEMError(
            f"This measure is defined for N={n}, got N={phases.n}",
            kind=ErrorKind.WRONG_ARITY,
        )


def _require_index(phases: PhaseMatrix, p: int) -> None:
    if not 0 <= p < phases.n:
        raise QGEMError(
            f"Mass index {p} out of range for N={phases.n}",
            kind=ErrorKind.INDEX_OUT_OF_RANGE,
        )


def _require_bipartition(phases: PhaseMatrix, bip: Bipartition) -> None:
    if bip.n != phases.n:
        raise QGEMError(
            f"Bipartition {bip.label} is for N={bip.n}, phases are for N={phases.n}",
            kind=ErrorKind.INVALID_BIPARTITION,
        )
