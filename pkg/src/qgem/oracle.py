"""Brute-force ground truth on the full 2^N state vector.

Basis convention: bit p of a basis index is the branch j_p of mass p
(0-based, little-endian). Reduced density matrices order their kept masses
the same way: bit i of a row index is the i-th lowest kept mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from qgem.bipartition import Bipartition, k_subsets
from qgem.errors import ErrorKind, QGEMError
from qgem.geometry import PairPhaseTable

DEFAULT_MAX_QUBITS = 24
NORM_TOLERANCE = 1e-10
RESIDUAL_TOLERANCE = 1e-9
EIGEN_DUST = 1e-14

_SIGMA_YY = np.array(
    [[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex
)


@dataclass(frozen=True, eq=False)
class StateVector:
    """2^N amplitudes of the time-evolved pure state."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2**self.n_qubits:
            raise QGEMError(
                f"{self.n_qubits} qubits need {2 ** self.n_qubits} amplitudes, "
                f"got {amps.size}",
                kind=ErrorKind.INVALID_STATE,
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise QGEMError(
                f"State is not normalised (norm^2 = {norm:.15g})",
                kind=ErrorKind.INVALID_STATE,
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace matrix over the masses in ``subset_mask``.

    ``factor`` is an optional M with rho = M M^dagger, kept when the matrix
    comes from a pure state.
    """

    matrix: np.ndarray
    subset_mask: int = 0
    factor: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        rho = np.array(self.matrix, dtype=complex)
        dim = rho.shape[0] if rho.ndim == 2 else 0
        if rho.ndim != 2 or rho.shape != (dim, dim) or dim < 2 or dim & (dim - 1):
            raise QGEMError(
                f"Density matrix must be 2^k x 2^k, got shape {rho.shape}",
                kind=ErrorKind.INVALID_STATE,
            )
        if not np.allclose(rho, rho.conj().T, rtol=0.0, atol=NORM_TOLERANCE):
            raise QGEMError(
                "Density matrix is not Hermitian", kind=ErrorKind.INVALID_STATE
            )
        trace = complex(np.trace(rho))
        if abs(trace - 1.0) > NORM_TOLERANCE:
            raise QGEMError(
                f"Density matrix trace is {trace.real:.15g}, expected 1",
                kind=ErrorKind.INVALID_STATE,
            )
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)
        if not self.subset_mask:
            object.__setattr__(self, "subset_mask", dim - 1)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def k(self) -> int:
        return self.dim.bit_length() - 1


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def evolve(
    table: PairPhaseTable, t: float, max_qubits: int = DEFAULT_MAX_QUBITS
) -> StateVector:
    """Amplitude of (j_1..j_N) is 2^(-N/2) exp(i t sum_{p<q} phi_{j_p j_q})."""
    n = table.n
    if n > max_qubits:
        raise QGEMError(
            f"{n} masses exceed the state-vector cap of {max_qubits} qubits",
            kind=ErrorKind.TOO_MANY_QUBITS,
        )
    # axis n-1-p of the tensor is bit p of the flat index
    phase = np.zeros((2,) * n)
    for p, q in combinations(range(n), 2):
        shape = [1] * n
        shape[n - 1 - p] = 2
        shape[n - 1 - q] = 2
        block = table.rates[p, q]
        # reshape orders axes by position; axis of q precedes axis of p
        phase = phase + block.T.reshape(shape)
    amplitudes = np.exp(1j * (phase.reshape(-1) * t)) / 2.0 ** (n / 2.0)
    return StateVector(n, amplitudes)


def reduced_density(state: StateVector, subset: int) -> DensityMatrix:
    """Partial trace onto ``subset`` (bitmask) by index gather.

    rho[a, b] = sum_e psi[merge(a, e)] conj(psi[merge(b, e)]).
    """
    n = state.n_qubits
    full = (1 << n) - 1
    if subset == 0:
        raise QGEMError(
            "Cannot reduce onto an empty subset", kind=ErrorKind.EMPTY_SUBSET
        )
    if subset & ~full:
        raise QGEMError(
            f"Subset mask {subset:#b} names masses beyond N={n}",
            kind=ErrorKind.INDEX_OUT_OF_RANGE,
        )
    if subset == full:
        raise QGEMError(
            "Reducing onto every mass leaves nothing to trace out",
            kind=ErrorKind.FULL_SUBSET,
        )
    factor = state.amplitudes[_gather_index(n, subset)]
    rho = factor @ factor.conj().T
    return DensityMatrix(rho, subset_mask=subset, factor=factor)


def purity(rho: DensityMatrix) -> float:
    """Tr(rho^2), the squared Frobenius norm of a Hermitian matrix."""
    return float(np.sum(np.abs(rho.matrix) ** 2))


def iconcurrence_oracle(state: StateVector, bip: Bipartition) -> float:
    """sqrt(2 (1 - Tr rho^2)) of the smaller part's reduction."""
    if bip.n != state.n_qubits:
        raise QGEMError(
            f"Bipartition {bip.label} is for N={bip.n}, state has N={state.n_qubits}",
            kind=ErrorKind.INVALID_BIPARTITION,
        )
    small, _ = bip.smaller_side()
    mask = sum(1 << p for p in small)
    return math.sqrt(max(0.0, 2.0 * (1.0 - purity(reduced_density(state, mask)))))


def wootters_concurrence(rho: DensityMatrix) -> float:
    """max(0, l1 - l2 - l3 - l4) for a two-qubit density matrix.

    The l_i are the singular values of M^T (Y x Y) M for any M with
    rho = M M^dagger; they equal the square roots of the eigenvalues of
    rho (Y x Y) rho* (Y x Y).
    """
    if rho.dim != 4:
        raise QGEMError(
            f"Wootters concurrence needs a 4x4 matrix, got {rho.dim}x{rho.dim}",
            kind=ErrorKind.NOT_TWO_QUBIT,
        )
    factor = rho.factor if rho.factor is not None else _hermitian_factor(rho.matrix)
    if factor.shape[1] > 4:
        factor = _square_factor(factor)
    tau = factor.T @ _SIGMA_YY @ factor
    singular = np.linalg.svd(tau, compute_uv=False)
    lams = np.sort(np.concatenate([singular, np.zeros(4)]))[::-1][:4]
    return float(max(0.0, lams[0] - lams[1] - lams[2] - lams[3]))


def pairwise_concurrence_oracle(state: StateVector, p: int, q: int) -> float:
    """Wootters concurrence of the two-mass reduction rho_pq."""
    if p == q:
        raise QGEMError(
            f"Pairwise concurrence needs two distinct masses, got {p + 1} twice",
            kind=ErrorKind.INDEX_OUT_OF_RANGE,
        )
    return wootters_concurrence(reduced_density(state, (1 << p) | (1 << q)))


def three_tangle_residual(state: StateVector, p: int = 0) -> float:
    """tau_123 = C^2_{p|qr} - C^2_pq - C^2_pr from the monogamy equality."""
    if state.n_qubits != 3:
        raise QGEMError(
            f"The 3-tangle needs N=3, got N={state.n_qubits}",
            kind=ErrorKind.WRONG_ARITY,
        )
    if not 0 <= p < 3:
        raise QGEMError(
            f"Mass index {p} out of range for N=3", kind=ErrorKind.INDEX_OUT_OF_RANGE
        )
    q, r = (x for x in range(3) if x != p)
    one_vs_rest = iconcurrence_oracle(state, Bipartition.of(3, [p]))
    residual = (
        one_vs_rest**2
        - pairwise_concurrence_oracle(state, p, q) ** 2
        - pairwise_concurrence_oracle(state, p, r) ** 2
    )
    if residual < -RESIDUAL_TOLERANCE:
        raise QGEMError(
            f"Negative 3-tangle residual {residual:.3e} for apex mass {p + 1}",
            kind=ErrorKind.NEGATIVE_RESIDUAL,
        )
    return max(residual, 0.0)


def meyer_wallach_qk_oracle(state: StateVector, k: int) -> float:
    """Q_k = 2^k/(2^k - 1) (1 - mean Tr rho_S^2) over all k-subsets S."""
    n = state.n_qubits
    if not 1 <= k <= n // 2:
        raise QGEMError(
            f"k must satisfy 1 <= k <= {n // 2} for N={n}, got k={k}",
            kind=ErrorKind.K_OUT_OF_RANGE,
        )
    purities = [
        purity(reduced_density(state, sum(1 << p for p in subset)))
        for subset in k_subsets(n, k)
    ]
    value = 2.0**k / (2.0**k - 1.0) * (1.0 - float(np.mean(purities)))
    return min(max(value, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Internal helpers
# ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def _gather_index(n: int, subset: int) -> np.ndarray:
    """idx[a, e]: flat index whose kept bits spell a and traced bits spell e."""
    kept = [p for p in range(n) if subset >> p & 1]
    traced = [p for p in range(n) if not subset >> p & 1]
    a = np.arange(2 ** len(kept), dtype=np.int64)[:, None]
    e = np.arange(2 ** len(traced), dtype=np.int64)[None, :]
    idx = np.zeros((a.size, e.size), dtype=np.int64)
    for i, pos in enumerate(kept):
        idx |= ((a >> i) & 1) << pos
    for i, pos in enumerate(traced):
        idx |= ((e >> i) & 1) << pos
    idx.setflags(write=False)
    return idx


def _hermitian_factor(matrix: np.ndarray) -> np.ndarray:
    weights, vectors = np.linalg.eigh(matrix)
    keep = weights > EIGEN_DUST
    return vectors[:, keep] * np.sqrt(weights[keep])


def _square_factor(factor: np.ndarray) -> np.ndarray:
    """4x4 F with F F^dagger = M M^dagger, from the R of M^dagger = QR."""
    r = np.linalg.qr(factor.conj().T, mode="r")
    return r.conj().T
