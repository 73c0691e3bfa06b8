"""
Distance (energy) landscapes between two series and the rotated lattice frame.

Entry ``(t1, t2)`` of a distance matrix is the local energy of matching
``X(t1)`` with ``Y(t2)``. Paths are described in the rotated frame
``t = t1 + t2`` (effective time) and ``x = t2 - t1`` (lag).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import LeadLagError, LengthMismatch, OutOfRange, ParityViolation, TooShort

__all__ = [
    "DistanceKind",
    "DistanceMatrix",
    "RotatedCoord",
    "build_distance",
    "to_rotated",
    "from_rotated",
    "level_of",
    "reverse_matrix",
]


class DistanceKind(enum.Enum):
    MINUS = "minus"
    PLUS = "plus"
    MIN_OF_BOTH = "min"

    @classmethod
    def parse(cls, value) -> "DistanceKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            return cls[str(value).upper()]


@dataclass(frozen=True)
class DistanceMatrix:
    """Dense ``n x n`` grid of nonnegative local energies.

    Rows index ``t1`` (first series), columns index ``t2`` (second series).
    The array is read-only so one matrix can back many concurrent
    computations.
    """

    energies: np.ndarray
    kind: DistanceKind = DistanceKind.MINUS

    def __post_init__(self):
        e = np.array(self.energies, dtype=np.float64, order="C")
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] < 1:
            raise LeadLagError(f"energies must be a non-empty square matrix, got shape {e.shape}")
        if not np.all(np.isfinite(e)) or np.any(e < 0):
            raise LeadLagError("energies must be finite and nonnegative")
        e.setflags(write=False)
        object.__setattr__(self, "energies", e)

    @property
    def n(self) -> int:
        return self.energies.shape[0]

    def __getitem__(self, node):
        return self.energies[node]

    def at(self, c: "RotatedCoord") -> float:
        t1, t2 = from_rotated(c, self.n)
        return float(self.energies[t1, t2])

    def to_csv(self, path) -> None:
        """Dump the matrix with one row per ``t1`` and one column per ``t2``."""
        np.savetxt(path, self.energies, delimiter=",", fmt="%.17g")


class RotatedCoord(NamedTuple):
    t: int
    x: int


def _values(s) -> np.ndarray:
    return np.asarray(getattr(s, "values", s), dtype=np.float64)


def build_distance(x, y, kind=DistanceKind.MINUS) -> DistanceMatrix:
    """Build ``eps(t1, t2)`` from two equally long series.

    ``MINUS`` is ``(X - Y)**2``, ``PLUS`` is ``(X + Y)**2`` and
    ``MIN_OF_BOTH`` takes the pointwise minimum of the two.
    """
    kind = DistanceKind.parse(kind)
    xv, yv = _values(x), _values(y)
    if xv.ndim != 1 or yv.ndim != 1:
        raise LeadLagError("series must be one-dimensional")
    if xv.size != yv.size:
        raise LengthMismatch(f"series lengths differ: {xv.size} != {yv.size}")
    if xv.size < 2:
        raise TooShort("series need at least 2 values")
    minus = np.subtract.outer(xv, yv) ** 2
    if kind is DistanceKind.MINUS:
        e = minus
    else:
        plus = np.add.outer(xv, yv) ** 2
        e = plus if kind is DistanceKind.PLUS else np.minimum(minus, plus)
    return DistanceMatrix(e, kind)


def reverse_matrix(energy: DistanceMatrix) -> DistanceMatrix:
    """Reverse both time axes: entry ``(t1, t2)`` moves to ``(n-1-t1, n-1-t2)``."""
    return DistanceMatrix(energy.energies[::-1, ::-1], energy.kind)


def to_rotated(t1: int, t2: int, n: Optional[int] = None) -> RotatedCoord:
    t1, t2 = int(t1), int(t2)
    if t1 < 0 or t2 < 0 or (n is not None and (t1 >= n or t2 >= n)):
        raise OutOfRange(f"node ({t1}, {t2}) outside the lattice")
    return RotatedCoord(t2 + t1, t2 - t1)


def from_rotated(c, n: Optional[int] = None) -> tuple[int, int]:
    t, x = int(c[0]), int(c[1])
    if (t + x) % 2:
        raise ParityViolation(f"t + x must be even, got t={t}, x={x}")
    t1, t2 = (t - x) // 2, (t + x) // 2
    if t1 < 0 or t2 < 0 or (n is not None and (t1 >= n or t2 >= n)):
        raise OutOfRange(f"rotated node (t={t}, x={x}) outside the lattice")
    return t1, t2


def level_of(n: int) -> np.ndarray:
    """Matrix of effective times ``t1 + t2`` for an ``n x n`` lattice."""
    r = np.arange(n)
    return np.add.outer(r, r)
