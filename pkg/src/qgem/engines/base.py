"""Engine Protocol + the immutable system an engine evaluates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Protocol, runtime_checkable

from qgem.closedform import RADICAND_TOLERANCE, TangleConvention
from qgem.geometry import PairPhaseTable, PhaseMatrix
from qgem.oracle import DEFAULT_MAX_QUBITS
from qgem.results import SweepPoint


@dataclass(frozen=True, eq=False)
class SystemState:
    """Everything an engine needs besides the sweep point.

    ``table`` and ``phases`` describe the same system; the closed-form engine
    reads ``phases`` and the oracle evolves ``table``.
    """

    phases: PhaseMatrix
    table: PairPhaseTable
    max_qubits: int = DEFAULT_MAX_QUBITS
    radicand_tolerance: float = RADICAND_TOLERANCE
    tangle_convention: TangleConvention = TangleConvention.UNORDERED

    @property
    def n(self) -> int:
        return self.phases.n


@runtime_checkable
class Engine(Protocol):
    """Interface both evaluation paths satisfy."""

    name: str

    def validate(self, system: SystemState) -> None:
        """Raise QGEMError if the system is out of this engine's reach."""
        ...

    def prepare(self, system: SystemState, t: float) -> Any:
        """Per-time state shared by every point at ``t``."""
        ...

    def evaluate(self, system: SystemState, prepared: Any, point: SweepPoint) -> float:
        """Value of one point. Raise QGEMError on any failure."""
        ...
