"""
Boundary enumeration and minimum-free-energy path selection.

Candidate paths start near the origin corner of the lattice and end near the
far corner. With the default ``axes`` scheme, starts are ``(0, 0)``,
``(0, i)`` and ``(i, 0)`` for ``i = 1..m`` and ends are their mirror images
at ``(N-1, N-1)``; ``m = 30`` gives the usual 61 x 61 candidates. The
``grid`` scheme uses every ``(i1, i2)`` with ``0 <= i1, i2 <= m`` instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import OffsetTooLarge
from .lattice import DistanceKind, DistanceMatrix, build_distance, to_rotated
from .series import TimeSeries, standardize
from .thermal import Method, ThermalPath, _check_temperature, path_between

__all__ = [
    "BoundarySpec",
    "PathSelection",
    "enumerate_boundaries",
    "select_best",
    "pair_free_energies",
    "min_free_energy",
    "prepare_energy",
    "analyze_pair",
]

SCHEMES = ("axes", "grid")


@dataclass(frozen=True)
class BoundarySpec:
    max_offset: int = 30
    scheme: str = "axes"

    def __post_init__(self):
        if int(self.max_offset) < 0:
            raise OffsetTooLarge(f"max_offset must be nonnegative, got {self.max_offset}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown boundary scheme {self.scheme!r}; expected one of {SCHEMES}")
        object.__setattr__(self, "max_offset", int(self.max_offset))


def _square_offsets(spec: BoundarySpec) -> list[tuple[int, int]]:
    m = spec.max_offset
    if spec.scheme == "axes":
        return [(0, 0)] + [(0, i) for i in range(1, m + 1)] + [(i, 0) for i in range(1, m + 1)]
    return [(i1, i2) for i1 in range(m + 1) for i2 in range(m + 1)]


def enumerate_boundaries(n: int, spec: BoundarySpec = BoundarySpec()):
    """Start and end nodes, in rotated coordinates, for an ``n``-long pair.

    ``ends[k]`` is the mirror of ``starts[k]`` through the lattice centre.
    """
    if spec.max_offset > n - 1:
        raise OffsetTooLarge(f"max_offset {spec.max_offset} exceeds n - 1 = {n - 1}")
    offs = _square_offsets(spec)
    starts = [to_rotated(a, b, n) for a, b in offs]
    ends = [to_rotated(n - 1 - a, n - 1 - b, n) for a, b in offs]
    return starts, ends


@dataclass(frozen=True, eq=False)
class PathSelection:
    """Outcome of a boundary sweep.

    ``free_energies[i, j]`` is the cost of the path from ``starts[i]`` to
    ``ends[j]``; ``best`` is the thermal path of the minimizing pair.
    """

    best: ThermalPath
    starts: list
    ends: list
    free_energies: np.ndarray = field(repr=False)

    @property
    def scanned(self) -> int:
        return int(self.free_energies.size)

    @property
    def energies(self) -> dict:
        return {
            (s, e): float(self.free_energies[i, j])
            for i, s in enumerate(self.starts)
            for j, e in enumerate(self.ends)
        }

    def table(self) -> list[dict]:
        return [
            {"start_t": s.t, "start_x": s.x, "end_t": e.t, "end_x": e.x, "free_energy": float(self.free_energies[i, j])}
            for i, s in enumerate(self.starts)
            for j, e in enumerate(self.ends)
        ]


def _square(coords, n):
    return np.array([((c.t - c.x) // 2, (c.t + c.x) // 2) for c in coords], dtype=np.int64)


def pair_free_energies(energy: DistanceMatrix, T: float, starts, ends, method=Method.TOPS) -> np.ndarray:
    """Free energy of every (start, end) candidate without building the paths.

    Forward fields are shared by all pairs with the same start and backward
    fields by all pairs with the same end, so the cost grows with the number
    of boundary nodes rather than the number of pairs. Pairs whose restricted
    occupancy underflows the fast linear-domain sweep are recomputed with
    the exact log-domain fields. Pairs whose end cannot be reached from
    their start (possible once two offsets add up past ``N - 1``) cost
    ``+inf``.
    """
    method = Method.parse(method)
    T = _check_temperature(T)
    n = energy.n
    E = energy.energies
    so = _square(starts, n)
    eo = _square(ends, n)
    B = np.exp(-E / T)
    fwd, bad = _kernels.restricted_energy_sums(B, E, so, eo)
    n_levels = (eo[:, 0] + eo[:, 1])[None, :] - (so[:, 0] + so[:, 1])[:, None] + 1
    if method is Method.TOPS:
        Er = np.ascontiguousarray(E[::-1, ::-1])
        Br = np.ascontiguousarray(B[::-1, ::-1])
        bwd, bad_b = _kernels.restricted_energy_sums(Br, Er, (n - 1) - eo, (n - 1) - so)
        fe = 0.5 * (fwd + bwd.T) / n_levels
        bad = bad | bad_b.T
    else:
        fe = fwd / n_levels
    unreachable = (eo[None, :, 0] < so[:, None, 0]) | (eo[None, :, 1] < so[:, None, 1])
    fe[unreachable] = np.inf
    for i, j in zip(*np.nonzero(bad & ~unreachable)):
        fe[i, j] = path_between(energy, T, starts[i], ends[j], method).free_energy
    return fe


def _tie_order(starts, ends) -> np.ndarray:
    keys = [
        (abs(s.x), abs(e.x), s.x, e.x, i, j)
        for i, s in enumerate(starts)
        for j, e in enumerate(ends)
    ]
    order = sorted(range(len(keys)), key=keys.__getitem__)
    return np.array(order, dtype=np.int64)


def select_best(energy: DistanceMatrix, T: float, spec: BoundarySpec = BoundarySpec(), method=Method.TOPS) -> PathSelection:
    """Sweep all boundary pairs and keep the path with the lowest free energy.

    Equal free energies are resolved towards the smallest
    ``(|start.x|, |end.x|, start.x, end.x)``.
    """
    method = Method.parse(method)
    starts, ends = enumerate_boundaries(energy.n, spec)
    fe = pair_free_energies(energy, T, starts, ends, method)
    order = _tie_order(starts, ends)
    flat = fe.ravel()
    pick = order[int(np.argmin(flat[order]))]
    i, j = divmod(int(pick), len(ends))
    best = path_between(energy, T, starts[i], ends[j], method)
    if not np.isclose(best.free_energy, fe[i, j], rtol=1e-9, atol=1e-12):
        raise RuntimeError(
            f"fast sweep and exact recursion disagree on pair {i},{j}: {fe[i, j]!r} vs {best.free_energy!r}"
        )
    fe[i, j] = best.free_energy
    fe.setflags(write=False)
    return PathSelection(best=best, starts=starts, ends=ends, free_energies=fe)


def min_free_energy(energy: DistanceMatrix, T: float, spec: BoundarySpec = BoundarySpec(), method=Method.TOPS) -> float:
    """Lowest candidate free energy, skipping the path reconstruction."""
    starts, ends = enumerate_boundaries(energy.n, spec)
    return float(pair_free_energies(energy, T, starts, ends, method).min())


def prepare_energy(x, y, kind=DistanceKind.MINUS, scale: bool = True) -> DistanceMatrix:
    """Distance matrix of two series, standardizing both first unless ``scale`` is off."""
    if scale:
        x = standardize(x if isinstance(x, TimeSeries) else TimeSeries(x))
        y = standardize(y if isinstance(y, TimeSeries) else TimeSeries(y))
    return build_distance(x, y, kind)


def analyze_pair(
    x, y, T: float = 2.0, spec: BoundarySpec = BoundarySpec(), method=Method.TOPS, kind=DistanceKind.MINUS, scale: bool = True
) -> PathSelection:
    """Build the landscape of a pair and select its best thermal path."""
    return select_best(prepare_energy(x, y, kind, scale), T, spec, method)
