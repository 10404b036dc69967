"""SweepPoint and EntanglementValue dataclasses."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

from qgem.bipartition import Bipartition

CSV_HEADER = ("t_seconds", "measure", "target", "engine", "value")

Target = Union[Bipartition, int, tuple[int, int], None]


class Measure(enum.Enum):
    """Quantities a sweep can emit, in output order."""

    TWO_BODY = "two_body"
    ICONCURRENCE = "iconcurrence"
    Q_K = "q_k"
    TANGLE3 = "tangle3"
    PAIRWISE = "pairwise"

    @classmethod
    def parse(cls, name: str) -> Measure:
        try:
            return cls(name.strip())
        except ValueError:
            known = ", ".join(m.value for m in cls)
            raise ValueError(f"Unknown measure {name!r}. Known: {known}") from None

    @property
    def needs_three_masses(self) -> bool:
        return self in (Measure.TANGLE3, Measure.PAIRWISE)


def format_float(value: float) -> str:
    return format(value, ".17g")


def target_label(measure: Measure, target: Target) -> str:
    """CSV target column: ``"125|346"``, ``"k=2"``, ``"1-2"`` or ``"123"``."""
    if isinstance(target, Bipartition):
        return target.label
    if measure is Measure.Q_K:
        return f"k={target}"
    if isinstance(target, tuple):
        p, q = target
        return f"{p + 1}-{q + 1}"
    return "123"


@dataclass(frozen=True)
class SweepPoint:
    """One (time, measure, target) cell of a sweep, before an engine runs it."""

    t: float
    measure: Measure
    target: Target = None

    @property
    def label(self) -> str:
        return target_label(self.measure, self.target)

    def context(self, engine: str) -> dict[str, object]:
        return {
            "t": self.t,
            "measure": self.measure.value,
            "target": self.label,
            "engine": engine,
        }


@dataclass(frozen=True)
class EntanglementValue:
    """One CSV row."""

    t: float
    measure: Measure
    target: str
    engine: str
    value: float

    @property
    def key(self) -> tuple[float, Measure, str]:
        return (self.t, self.measure, self.target)

    def to_csv_row(self) -> list[str]:
        return [
            format_float(self.t),
            self.measure.value,
            self.target,
            self.engine,
            format_float(self.value),
        ]
