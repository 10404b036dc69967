"""Error kinds + the single exception type raised by computations."""

from __future__ import annotations

import enum
from typing import Any


class ErrorKind(enum.Enum):
    """Classification of computation failures.

    NEGATIVE_RADICAND and NEGATIVE_RESIDUAL flag numerical faults in the
    implementation, never a legitimate physical input.
    """

    ZERO_DISTANCE = "ZERO_DISTANCE"
    THRESHOLD_VIOLATION = "THRESHOLD_VIOLATION"
    INVALID_SETUP = "INVALID_SETUP"
    INVALID_PHASES = "INVALID_PHASES"
    INVALID_STATE = "INVALID_STATE"
    WRONG_ARITY = "WRONG_ARITY"
    INVALID_BIPARTITION = "INVALID_BIPARTITION"
    NEGATIVE_RADICAND = "NEGATIVE_RADICAND"
    K_OUT_OF_RANGE = "K_OUT_OF_RANGE"
    TOO_MANY_QUBITS = "TOO_MANY_QUBITS"
    EMPTY_SUBSET = "EMPTY_SUBSET"
    FULL_SUBSET = "FULL_SUBSET"
    NOT_TWO_QUBIT = "NOT_TWO_QUBIT"
    NEGATIVE_RESIDUAL = "NEGATIVE_RESIDUAL"
    ALL_ZERO_PHASES = "ALL_ZERO_PHASES"
    INDEX_OUT_OF_RANGE = "INDEX_OUT_OF_RANGE"
    UNKNOWN = "UNKNOWN"


class QGEMError(Exception):
    """All computation errors are raised as this exception."""

    def __init__(
        self,
        message: str,
        kind: ErrorKind = ErrorKind.UNKNOWN,
        cause: Exception | None = None,
        context: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message)
        self.kind = kind
        self.cause = cause
        self.context: dict[str, Any] = dict(context or {})


def is_implementation_fault(error: QGEMError) -> bool:
    """Return True for kinds that can only come from a numerical bug.

    A radicand or residual below the tolerance means two formulas that must
    agree have drifted apart; the input itself is never to blame.
    """
    return error.kind in (ErrorKind.NEGATIVE_RADICAND, ErrorKind.NEGATIVE_RESIDUAL)
