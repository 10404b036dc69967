"""Closed-form engine: analytic formulas over the phase matrix."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from qgem import closedform, oracle
from qgem.engines.base import SystemState
from qgem.errors import ErrorKind, QGEMError
from qgem.results import Measure, SweepPoint


@dataclass
class _AtTime:
    system: SystemState
    t: float

    @cached_property
    def tau123(self) -> float:
        # the published 3-tangle is not trusted; pairwise values use the residual
        state = oracle.evolve(self.system.table, self.t, self.system.max_qubits)
        return oracle.three_tangle_residual(state, 0)


class ClosedFormEngine:
    """Evaluates every measure without building a state vector.

    The pairwise measure is the one exception: it needs the 3-tangle, which
    comes from the state-vector residual.
    """

    name = "closed"

    def validate(self, system: SystemState) -> None:
        pass  # any N

    def prepare(self, system: SystemState, t: float) -> _AtTime:
        return _AtTime(system, t)

    def evaluate(
        self, system: SystemState, prepared: _AtTime, point: SweepPoint
    ) -> float:
        phases, t = system.phases, point.t
        tolerance = system.radicand_tolerance
        if point.measure is Measure.TWO_BODY:
            p, q = point.target
            return closedform.concurrence_two_body(phases.phase(p, q), t)
        if point.measure is Measure.ICONCURRENCE:
            return closedform.iconcurrence(phases, point.target, t, tolerance)
        if point.measure is Measure.Q_K:
            return closedform.meyer_wallach_qk(phases, point.target, t)
        if point.measure is Measure.TANGLE3:
            return closedform.three_tangle_published(
                phases, t, system.tangle_convention, tolerance
            ).value
        if point.measure is Measure.PAIRWISE:
            p, q = point.target
            return closedform.pairwise_concurrence(
                phases, p, q, t, prepared.tau123, tolerance
            )
        raise QGEMError(
            f"Measure {point.measure.value!r} is not supported by {self.name}",
            kind=ErrorKind.UNKNOWN,
        )
