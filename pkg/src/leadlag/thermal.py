"""
Boltzmann partition fields on the directed lattice and thermal-average paths.

A forward field from ``origin`` holds, for every node it can reach, the sum
of ``exp(-sum(eps)/T)`` over all directed paths from the origin to that node
(both end nodes included). The backward field is the same object computed
from an end node with time running backwards.

Occupancies used by both path flavours are restricted to the nodes lying on
at least one path from the chosen start to the chosen end, and renormalized
per level; this pins the path to both boundary nodes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InvalidTemperature, LeadLagError, UnreachableEnd
from .lattice import DistanceKind, DistanceMatrix, RotatedCoord, from_rotated, level_of

__all__ = [
    "Direction",
    "Method",
    "PartitionField",
    "ThermalPath",
    "forward_field",
    "backward_field",
    "top_path",
    "tops_path",
    "free_energy",
    "restricted_occupancy",
    "path_between",
]


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class Method(enum.Enum):
    TOP = "top"
    TOPS = "tops"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def _check_temperature(T) -> float:
    T = float(T)
    if not (T > 0 and np.isfinite(T)):
        raise InvalidTemperature(f"temperature must be positive and finite, got {T}")
    return T


@dataclass(frozen=True, eq=False)
class PartitionField:
    """Log-domain partition function emanating from one node.

    ``logw`` is stored on the square lattice (``logw[t1, t2]``) in the
    original time orientation for both directions; ``-inf`` marks nodes the
    origin cannot reach. ``lognorm[t]`` is the log of the level total.
    """

    direction: Direction
    origin: RotatedCoord
    temperature: float
    energy: DistanceMatrix
    logw: np.ndarray = field(repr=False)
    lognorm: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.energy.n

    def reachable(self) -> np.ndarray:
        return np.isfinite(self.logw)

    def log_weight(self, c) -> float:
        t1, t2 = from_rotated(c, self.n)
        return float(self.logw[t1, t2])

    def nodes(self, t: int):
        """``(x, logw)`` arrays of the reachable nodes on level ``t``."""
        n = self.n
        t1 = np.arange(max(0, t - n + 1), min(n - 1, t) + 1)
        lw = self.logw[t1, t - t1]
        keep = np.isfinite(lw)
        x = (t - 2 * t1)[keep]
        order = np.argsort(x)
        return x[order], lw[keep][order]

    def occupancy(self, t: int):
        """``(x, p)`` with ``p = G(t, x) / G(t)`` over the reachable nodes of level ``t``."""
        x, lw = self.nodes(t)
        if x.size == 0:
            return x, lw
        return x, np.exp(lw - self.lognorm[t])


def _level_sums(a: np.ndarray) -> np.ndarray:
    return _kernels.level_sums(np.ascontiguousarray(a, dtype=np.float64))


def _mirror_mean(v: np.ndarray) -> float:
    """Mean whose value does not change when ``v`` is reversed."""
    h = v.size // 2
    total = float(np.add.reduce(v[:h] + v[::-1][:h]))
    if v.size % 2:
        total += float(v[h])
    return total / v.size


def _level_logsumexp(lw: np.ndarray) -> np.ndarray:
    n = lw.shape[0]
    finite = np.isfinite(lw)
    levels = level_of(n)
    peak = np.full(2 * n - 1, -np.inf)
    np.maximum.at(peak, levels[finite], lw[finite])
    shift = np.where(np.isfinite(peak), peak, 0.0)
    w = np.exp(np.where(finite, lw - shift[levels], -np.inf))
    total = _level_sums(w)
    with np.errstate(divide="ignore"):
        return np.where(total > 0, np.log(total) + shift, -np.inf)


def _make_field(energy: DistanceMatrix, T: float, origin, direction: Direction) -> PartitionField:
    n = energy.n
    a1, a2 = from_rotated(origin, n)
    E = energy.energies
    if direction is Direction.BACKWARD:
        lw = _kernels.log_field(np.ascontiguousarray(E[::-1, ::-1]), 1.0 / T, n - 1 - a1, n - 1 - a2)
        lw = np.ascontiguousarray(lw[::-1, ::-1])
    else:
        lw = _kernels.log_field(E, 1.0 / T, a1, a2)
    lw.setflags(write=False)
    lognorm = _level_logsumexp(lw)
    lognorm.setflags(write=False)
    return PartitionField(direction, RotatedCoord(int(origin[0]), int(origin[1])), T, energy, lw, lognorm)


def forward_field(energy: DistanceMatrix, T: float, origin) -> PartitionField:
    """Partition field over all directed paths starting at ``origin``.

    ``logw(origin) = -eps(origin)/T`` and every other reachable node adds up
    its (up to) three predecessors before applying its own Boltzmann factor.
    """
    T = _check_temperature(T)
    return _make_field(energy, T, origin, Direction.FORWARD)


def backward_field(energy: DistanceMatrix, T: float, origin) -> PartitionField:
    """Partition field over all directed paths ending at ``origin``.

    Equal, node for node, to the forward field of the doubly time-reversed
    matrix seeded at the mirrored origin.
    """
    T = _check_temperature(T)
    return _make_field(energy, T, origin, Direction.BACKWARD)


@dataclass(frozen=True, eq=False)
class ThermalPath:
    """Thermal-average lag ``<x(t)>`` between two pinned boundary nodes.

    ``ts`` runs over every level from ``start.t`` to ``end.t`` inclusive and
    ``n_levels`` is the count used to normalize ``free_energy``.
    """

    temperature: float
    start: RotatedCoord
    end: RotatedCoord
    ts: np.ndarray = field(repr=False)
    xs: np.ndarray = field(repr=False)
    free_energy: float
    method: Method
    distance_kind: DistanceKind
    n: int
    level_energy: np.ndarray = field(repr=False, default=None)

    @property
    def n_levels(self) -> int:
        return int(self.ts.size)

    def at(self, t: int) -> float:
        return float(self.xs[int(t) - self.start.t])

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "distance": self.distance_kind.value,
            "temperature": self.temperature,
            "n": self.n,
            "start": {"t": self.start.t, "x": self.start.x},
            "end": {"t": self.end.t, "x": self.end.x},
            "free_energy": self.free_energy,
            "n_levels": self.n_levels,
            "t": self.ts.tolist(),
            "x": self.xs.tolist(),
        }


def _pair_mask(n: int, start, end) -> np.ndarray:
    s1, s2 = from_rotated(start, n)
    e1, e2 = from_rotated(end, n)
    if e1 < s1 or e2 < s2:
        raise UnreachableEnd(f"end {tuple(end)} is not reachable from start {tuple(start)}")
    mask = np.zeros((n, n), dtype=bool)
    mask[s1 : e1 + 1, s2 : e2 + 1] = True
    return mask


def restricted_occupancy(fld: PartitionField, start, end) -> np.ndarray:
    """Per-level normalized occupancy of ``fld`` on nodes between ``start`` and ``end``.

    Returned on the square lattice; zero outside the restricted set.
    """
    n = fld.n
    mask = _pair_mask(n, start, end) & fld.reachable()
    levels = level_of(n)
    lw = np.where(mask, fld.logw, -np.inf)
    lnorm = _level_logsumexp(lw)
    with np.errstate(invalid="ignore"):
        p = np.where(mask, np.exp(lw - lnorm[levels]), 0.0)
    return p


def free_energy(energy: DistanceMatrix, occupancy: np.ndarray, start, end) -> tuple[float, np.ndarray]:
    """Average over levels ``start.t .. end.t`` of the occupancy-weighted energy.

    Returns the scalar cost and the per-level mean energies. The number of
    levels equals ``2N - |x0| - |xN| - 1`` for boundary nodes on the
    lattice axes.
    """
    per_level = _level_sums(occupancy * energy.energies)
    span = per_level[int(start[0]) : int(end[0]) + 1]
    return _mirror_mean(span), span


def _path_from_occupancy(energy, occ, start, end, T, method) -> ThermalPath:
    n = energy.n
    r = np.arange(n)
    x = r[None, :] - r[:, None]
    mass = _level_sums(occ)
    xs_all = _level_sums(occ * x)
    ts = np.arange(int(start[0]), int(end[0]) + 1)
    span_mass = mass[ts]
    if not np.allclose(span_mass, 1.0, atol=1e-9):
        raise LeadLagError("restricted occupancy is not normalized on every level")
    xs = xs_all[ts]
    fe, per_level = free_energy(energy, occ, start, end)
    ts.setflags(write=False)
    xs.setflags(write=False)
    per_level.setflags(write=False)
    return ThermalPath(
        temperature=T,
        start=RotatedCoord(int(start[0]), int(start[1])),
        end=RotatedCoord(int(end[0]), int(end[1])),
        ts=ts,
        xs=xs,
        free_energy=fe,
        method=method,
        distance_kind=energy.kind,
        n=n,
        level_energy=per_level,
    )


def top_path(fwd: PartitionField, end) -> ThermalPath:
    """Forward-only thermal path from ``fwd.origin`` to ``end``."""
    start = fwd.origin
    _pair_mask(fwd.n, start, end)
    occ = restricted_occupancy(fwd, start, end)
    return _path_from_occupancy(fwd.energy, occ, start, end, fwd.temperature, Method.TOP)


def tops_path(fwd: PartitionField, bwd: PartitionField, start=None, end=None) -> ThermalPath:
    """Time-reversal symmetric thermal path.

    Each level's occupancy is the mean of the restricted forward and
    restricted backward occupancies.
    """
    start = fwd.origin if start is None else RotatedCoord(int(start[0]), int(start[1]))
    end = bwd.origin if end is None else RotatedCoord(int(end[0]), int(end[1]))
    if tuple(fwd.origin) != tuple(start) or tuple(bwd.origin) != tuple(end):
        raise LeadLagError("forward field must start at `start` and backward field at `end`")
    if fwd.energy is not bwd.energy and not np.array_equal(fwd.energy.energies, bwd.energy.energies):
        raise LeadLagError("fields were computed on different energy landscapes")
    if fwd.temperature != bwd.temperature:
        raise LeadLagError("fields were computed at different temperatures")
    _pair_mask(fwd.n, start, end)
    occ = 0.5 * (restricted_occupancy(fwd, start, end) + restricted_occupancy(bwd, start, end))
    return _path_from_occupancy(fwd.energy, occ, start, end, fwd.temperature, Method.TOPS)


def path_between(energy: DistanceMatrix, T: float, start, end, method=Method.TOPS) -> ThermalPath:
    """Convenience wrapper computing the needed fields and the path."""
    method = Method.parse(method)
    fwd = forward_field(energy, T, start)
    if method is Method.TOP:
        return top_path(fwd, end)
    return tops_path(fwd, backward_field(energy, T, end), start, end)
