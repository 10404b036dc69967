"""Bipartitions of N masses as canonical bitmasks.

Mass indices are 0-based in code (bit p of ``left_mask`` is mass p) and
1-based in labels: ``Bipartition.of(6, [0, 1, 4]).label == "125|346"``.
Systems with ten or more masses use comma-separated labels
(``"1,2,10|3,4,5,6,7,8,9,11"``).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator

from qgem.errors import ErrorKind, QGEMError


@dataclass(frozen=True, order=True)
class Bipartition:
    """A split of ``{0..n-1}`` into two nonempty parts.

    The part holding mass 0 is always the left part; a mask without bit 0 is
    replaced by its complement on construction.
    """

    n: int
    left_mask: int

    def __post_init__(self) -> None:
        full = (1 << self.n) - 1
        if self.n < 2:
            raise QGEMError(
                f"Bipartition needs at least 2 masses, got n={self.n}",
                kind=ErrorKind.INVALID_BIPARTITION,
            )
        if self.left_mask <= 0 or self.left_mask >= full or self.left_mask & ~full:
            raise QGEMError(
                f"Bipartition mask {self.left_mask:#b} is not a proper nonempty "
                f"subset of {self.n} masses",
                kind=ErrorKind.INVALID_BIPARTITION,
            )
        if not self.left_mask & 1:
            object.__setattr__(self, "left_mask", full ^ self.left_mask)

    @classmethod
    def of(cls, n: int, left: Iterable[int]) -> Bipartition:
        """Build from 0-based mass indices of one part."""
        mask = 0
        for p in left:
            if not 0 <= p < n:
                raise QGEMError(
                    f"Mass index {p} out of range for n={n}",
                    kind=ErrorKind.INVALID_BIPARTITION,
                )
            mask |= 1 << p
        return cls(n, mask)

    @classmethod
    def parse(cls, label: str, n: int) -> Bipartition:
        """Parse a 1-based label such as ``"125|346"``.

        Both parts must be given and together cover every mass exactly once.
        """
        parts = label.strip().split("|")
        if len(parts) != 2 or not all(part.strip() for part in parts):
            raise QGEMError(
                f"Bipartition {label!r} must have the form 'left|right'",
                kind=ErrorKind.INVALID_BIPARTITION,
            )
        sides = [_parse_side(part, label) for part in parts]
        seen = sides[0] + sides[1]
        duplicates = sorted({p for p in seen if seen.count(p) > 1})
        if duplicates:
            raise QGEMError(
                f"Bipartition {label!r} repeats mass(es) {_fmt(duplicates)}",
                kind=ErrorKind.INVALID_BIPARTITION,
            )
        out_of_range = sorted(p for p in seen if not 0 <= p < n)
        if out_of_range:
            raise QGEMError(
                f"Bipartition {label!r} names mass(es) {_fmt(out_of_range)} "
                f"but the system has {n}",
                kind=ErrorKind.INVALID_BIPARTITION,
            )
        missing = sorted(set(range(n)) - set(seen))
        if missing:
            raise QGEMError(
                f"Bipartition {label!r} leaves mass(es) {_fmt(missing)} unassigned",
                kind=ErrorKind.INVALID_BIPARTITION,
            )
        return cls.of(n, sides[0])

    @property
    def right_mask(self) -> int:
        return ((1 << self.n) - 1) ^ self.left_mask

    @property
    def left(self) -> tuple[int, ...]:
        return _members(self.left_mask, self.n)

    @property
    def right(self) -> tuple[int, ...]:
        return _members(self.right_mask, self.n)

    @property
    def k(self) -> int:
        """Size of the smaller part."""
        return min(len(self.left), len(self.right))

    def smaller_side(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Return ``(small, large)``; ties keep the canonical left part first."""
        left, right = self.left, self.right
        if len(left) <= len(right):
            return left, right
        return right, left

    @property
    def label(self) -> str:
        sep = "," if self.n >= 10 else ""
        left = sep.join(str(p + 1) for p in self.left)
        right = sep.join(str(p + 1) for p in self.right)
        return f"{left}|{right}"

    def sort_key(self) -> tuple[int, ...]:
        return self.left

    def __str__(self) -> str:
        return self.label


def all_bipartitions(n: int) -> list[Bipartition]:
    """Every canonical bipartition of ``n`` masses, lexicographic by left part."""
    found = {
        Bipartition.of(n, subset)
        for size in range(1, n)
        for subset in combinations(range(n), size)
    }
    return sorted(found, key=Bipartition.sort_key)


def one_vs_rest(n: int) -> list[Bipartition]:
    """The ``1|(n-1)`` bipartitions, one per mass (deduplicated for n=2)."""
    found = {Bipartition.of(n, [p]) for p in range(n)}
    return sorted(found, key=Bipartition.sort_key)


def k_subsets(n: int, k: int) -> Iterator[tuple[int, ...]]:
    return combinations(range(n), k)


def _members(mask: int, n: int) -> tuple[int, ...]:
    return tuple(p for p in range(n) if mask >> p & 1)


def _parse_side(text: str, label: str) -> list[int]:
    text = text.strip()
    tokens = [tok.strip() for tok in text.split(",")] if "," in text else list(text)
    try:
        return [int(tok) - 1 for tok in tokens]
    except ValueError:
        raise QGEMError(
            f"Bipartition {label!r} contains a non-numeric mass label",
            kind=ErrorKind.INVALID_BIPARTITION,
        )


def _fmt(indices: list[int]) -> str:
    return ", ".join(str(p + 1) for p in indices)
