"""State-vector engine: evolves the full 2^N state once per time."""

from __future__ import annotations

from qgem import oracle
from qgem.bipartition import Bipartition
from qgem.engines.base import SystemState
from qgem.errors import ErrorKind, QGEMError
from qgem.results import Measure, SweepPoint


class StateVectorEngine:
    name = "oracle"

    def validate(self, system: SystemState) -> None:
        if system.n > system.max_qubits:
            raise QGEMError(
                f"{system.n} masses exceed the state-vector cap of "
                f"{system.max_qubits} qubits",
                kind=ErrorKind.TOO_MANY_QUBITS,
            )

    def prepare(self, system: SystemState, t: float) -> oracle.StateVector:
        return oracle.evolve(system.table, t, system.max_qubits)

    def evaluate(
        self, system: SystemState, prepared: oracle.StateVector, point: SweepPoint
    ) -> float:
        if point.measure is Measure.TWO_BODY:
            # the isolated pair, not a reduction of the N-mass state
            p, q = point.target
            pair = oracle.evolve(system.table.subsystem([p, q]), point.t)
            return oracle.iconcurrence_oracle(pair, Bipartition.of(2, [0]))
        if point.measure is Measure.ICONCURRENCE:
            return oracle.iconcurrence_oracle(prepared, point.target)
        if point.measure is Measure.Q_K:
            return oracle.meyer_wallach_qk_oracle(prepared, point.target)
        if point.measure is Measure.TANGLE3:
            return oracle.three_tangle_residual(prepared, 0)
        if point.measure is Measure.PAIRWISE:
            p, q = point.target
            return oracle.pairwise_concurrence_oracle(prepared, p, q)
        raise QGEMError(
            f"Measure {point.measure.value!r} is not supported by {self.name}",
            kind=ErrorKind.UNKNOWN,
        )
