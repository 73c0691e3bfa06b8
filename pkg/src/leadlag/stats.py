"""
Significance procedures for thermal lead-lag paths.

* bootstrap quantile bands from reshuffled pairs,
* the free-energy overlap ``rho`` between a signal ensemble and its
  reshuffled surrogates, with signal-strength maps over ``(a, f)``,
* the synchronized regression ``Y(t) = c + a X(t - lag(t))`` and its
  moving-window scan.

Ensemble work (replicates, map members) runs through a thread pool; the
compiled kernels release the GIL. Results are always reduced in index
order, so the worker count never changes the output.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats as sps

from .errors import DegenerateSeries, EmptySample, GridMismatch, InsufficientOverlap, LeadLagError
from .lattice import DistanceKind
from .pathsel import BoundarySpec, analyze_pair, min_free_energy, prepare_energy
from .synth import PiecewiseLagModel, gen_random_model, reshuffle, synthetic_pair
from .thermal import Method, ThermalPath

__all__ = [
    "BootstrapBand",
    "RhoResult",
    "SelfConsistencyResult",
    "WindowScan",
    "SignalMap",
    "bootstrap_band",
    "rho_metric",
    "regression_ttest",
    "path_to_lags",
    "round_half_away",
    "moving_window_scan",
    "ensemble_free_energies",
    "signal_map",
    "signal_maps",
    "temperature_profile",
    "rho_by_regeneration",
    "DEFAULT_GRID",
    "T_CAP",
]

# a/f grid of the published maps: 0.01 .. 0.96 in steps of 0.05
DEFAULT_GRID = tuple(round(0.01 + 0.05 * i, 2) for i in range(20))
# |t| statistics are reported no larger than this (perfect fits give inf)
T_CAP = 1e12
MIN_POINTS = 10


def _pool_map(fn, items, workers):
    if workers is None or workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=int(workers)) as ex:
        return list(ex.map(fn, items))


def _seed_for(seed, *keys) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), *map(int, keys)])


# ---------------------------------------------------------------- bootstrap


@dataclass(frozen=True, eq=False)
class BootstrapBand:
    """Per-level quantiles of thermal paths from reshuffled pairs.

    Curves are indexed by ``ts = 0 .. 2N-2``; ``coverage[t]`` counts the
    replicate paths defined at level ``t`` and the quantiles are NaN where
    it is zero.
    """

    n_reshuffles: int
    ts: np.ndarray = field(repr=False)
    q_low: np.ndarray = field(repr=False)
    q_high: np.ndarray = field(repr=False)
    coverage: np.ndarray = field(repr=False)
    quantiles: tuple = (0.05, 0.95)
    paths: Optional[np.ndarray] = field(default=None, repr=False)

    def width(self, t: int) -> float:
        return float(self.q_high[t] - self.q_low[t])

    def flag(self, path: ThermalPath) -> np.ndarray:
        """True where ``path`` lies outside ``[q_low, q_high]`` (strictly)."""
        lo = self.q_low[path.ts]
        hi = self.q_high[path.ts]
        return (path.xs < lo) | (path.xs > hi)

    def reversal_asymmetry(self) -> np.ndarray:
        """``|q_low(t) + q_high(2N-2-t)|`` on levels every replicate covers."""
        full = self.coverage == self.n_reshuffles
        full = full & full[::-1]
        out = np.full(self.ts.size, np.nan)
        out[full] = np.abs(self.q_low[full] + self.q_high[::-1][full])
        return out

    def to_dict(self) -> dict:
        return {
            "n_reshuffles": self.n_reshuffles,
            "quantiles": list(self.quantiles),
            "t": self.ts.tolist(),
            "q_low": [None if not np.isfinite(v) else float(v) for v in self.q_low],
            "q_high": [None if not np.isfinite(v) else float(v) for v in self.q_high],
            "coverage": self.coverage.tolist(),
        }


def bootstrap_band(
    x,
    y,
    n: int = 100,
    seed=0,
    T: float = 2.0,
    method=Method.TOPS,
    spec: BoundarySpec = BoundarySpec(),
    kind=DistanceKind.MINUS,
    quantiles=(0.05, 0.95),
    keep_paths: bool = False,
    workers: int = 1,
    scale: bool = True,
) -> BootstrapBand:
    """Quantile band of best paths over ``n`` independent reshuffles of both series.

    ``scale`` standardizes each reshuffled pair before building its
    landscape, as the analysis of the original pair does.
    """
    if n < 20:
        raise LeadLagError(f"bootstrap needs at least 20 reshuffles, got {n}")
    xv = np.asarray(getattr(x, "values", x), dtype=np.float64)
    yv = np.asarray(getattr(y, "values", y), dtype=np.float64)
    N = xv.size
    method = Method.parse(method)

    def one(i):
        sx, sy = _seed_for(seed, i).spawn(2)
        sel = analyze_pair(reshuffle(xv, sx), reshuffle(yv, sy), T, spec, method, kind, scale)
        row = np.full(2 * N - 1, np.nan)
        row[sel.best.ts] = sel.best.xs
        return row

    paths = np.vstack(_pool_map(one, range(n), workers))
    coverage = np.isfinite(paths).sum(axis=0)
    with warnings.catch_warnings():
        # all-NaN columns (levels no replicate reaches) stay NaN
        warnings.simplefilter("ignore", RuntimeWarning)
        q = np.nanquantile(paths, quantiles, axis=0)
    ts = np.arange(2 * N - 1)
    for a in (ts, q[0], q[1], coverage):
        a.setflags(write=False)
    return BootstrapBand(
        n_reshuffles=n,
        ts=ts,
        q_low=q[0],
        q_high=q[1],
        coverage=coverage,
        quantiles=tuple(quantiles),
        paths=paths if keep_paths else None,
    )


# ---------------------------------------------------------------------- rho


@dataclass(frozen=True, eq=False)
class RhoResult:
    rho: float
    fe_signal: np.ndarray = field(repr=False)
    fe_random: np.ndarray = field(repr=False)
    bins: dict = field(repr=False, default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "fe_signal": self.fe_signal.tolist(),
            "fe_random": self.fe_random.tolist(),
            "bins": {"rule": self.bins.get("rule"), "edges": list(map(float, self.bins.get("edges", [])))},
        }


def _fd_count(pooled: np.ndarray) -> int:
    """Freedman-Diaconis bin count, at most one bin per pooled value.

    A near-zero interquartile range would otherwise ask for an unbounded
    number of bins; a zero one falls back to Sturges' rule.
    """
    n = pooled.size
    span = float(np.ptp(pooled))
    if span == 0:
        return 1
    q75, q25 = np.percentile(pooled, [75, 25])
    h = 2.0 * (q75 - q25) * n ** (-1.0 / 3.0)
    if not h > 0:
        return min(math.ceil(math.log2(n)) + 1, n)
    with np.errstate(over="ignore"):
        k = span / h
    return n if not k < n else max(math.ceil(k), 1)


def rho_metric(fe_signal, fe_random, bins="fd") -> RhoResult:
    """Overlap area of the two normalized free-energy histograms.

    Both samples share one bin grid over the pooled range; by default its
    width follows the Freedman-Diaconis rule on the pooled sample, capped at
    one bin per pooled value. ``bins``
    may also be an integer count or an explicit edge array.
    """
    a = np.asarray(fe_signal, dtype=np.float64).ravel()
    b = np.asarray(fe_random, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise EmptySample("both free-energy samples must be nonempty")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise LeadLagError("free-energy samples must be finite")
    pooled = np.concatenate([a, b])
    rule = bins if isinstance(bins, str) else ("count" if np.ndim(bins) == 0 else "edges")
    if isinstance(bins, str) and bins == "fd":
        bins = _fd_count(pooled)
    try:
        edges = np.histogram_bin_edges(pooled, bins=bins)
    except ValueError:
        # a range too narrow to split (subnormal widths) is one bin
        edges = np.histogram_bin_edges(pooled, bins=1)
    ca, _ = np.histogram(a, edges)
    cb, _ = np.histogram(b, edges)
    # integer arithmetic keeps identical samples at exactly 1
    na, nb = int(ca.sum()), int(cb.sum())
    overlap = int(np.minimum(ca.astype(np.int64) * nb, cb.astype(np.int64) * na).sum())
    rho = overlap / (na * nb) if na and nb else 0.0
    return RhoResult(float(rho), a, b, {"rule": rule, "edges": edges})


# ---------------------------------------------------------------- regression


@dataclass(frozen=True)
class SelfConsistencyResult:
    """OLS of ``Y(t)`` on ``X(t - lag(t))`` over one window of ``Y`` indices."""

    a_hat: float
    c_hat: float
    t_stat: float
    p_value: float
    significant: bool
    f_hat: float
    window: tuple
    n_points: int
    rho_lookup: Optional[float] = None
    clamped: bool = False

    def to_dict(self) -> dict:
        return {
            "start": self.window[0],
            "length": self.window[1],
            "a_hat": self.a_hat,
            "c_hat": self.c_hat,
            "t_stat": self.t_stat,
            "p_value": self.p_value,
            "significant": self.significant,
            "f_hat": self.f_hat,
            "n_points": self.n_points,
            "rho": self.rho_lookup,
            "clamped": self.clamped,
        }


def regression_ttest(x, y, lags, window=None, alpha: float = 0.05) -> SelfConsistencyResult:
    """Synchronized regression and two-sided slope t-test on one window.

    ``lags[t]`` is the lag of ``Y(t)`` behind ``X`` (NaN when unusable);
    points whose shifted index falls outside ``X`` are dropped. ``window``
    is ``(start, length)`` over ``Y`` indices and defaults to the whole
    series. ``f_hat`` is the RMS of ``Y - a_hat X(t - lag)`` over the
    sample stdev of ``X`` on the same window, both with ``n - 1`` in the
    denominator.
    """
    xv = np.asarray(getattr(x, "values", x), dtype=np.float64)
    yv = np.asarray(getattr(y, "values", y), dtype=np.float64)
    n = yv.size
    lag = np.asarray(lags, dtype=np.float64)
    if lag.ndim == 0:
        lag = np.full(n, float(lag))
    if lag.size != n or xv.size != n:
        raise LeadLagError(f"x, y and lags must share one length: {xv.size}, {n}, {lag.size}")
    start, length = (0, n) if window is None else (int(window[0]), int(window[1]))
    if start < 0 or length < 1 or start + length > n:
        raise LeadLagError(f"window ({start}, {length}) does not fit a series of length {n}")
    t = np.arange(start, start + length)
    lw = lag[t]
    ok = np.isfinite(lw)
    src = np.where(ok, t - np.where(ok, lw, 0.0), -1).astype(np.int64)
    ok &= (src >= 0) & (src < n)
    m = int(ok.sum())
    if m < MIN_POINTS:
        raise InsufficientOverlap(f"only {m} usable points in window ({start}, {length}); need {MIN_POINTS}")
    xs = xv[src[ok]]
    ys = yv[t[ok]]
    xm, ym = xs.mean(), ys.mean()
    dx = xs - xm
    sxx = float(dx @ dx)
    if not sxx > 0:
        raise DegenerateSeries(f"shifted X is constant in window ({start}, {length})")
    a_hat = float(dx @ (ys - ym)) / sxx
    c_hat = float(ym - a_hat * xm)
    resid = ys - c_hat - a_hat * xs
    dof = m - 2
    s2 = float(resid @ resid) / dof
    se = math.sqrt(s2 / sxx)
    if se > 0:
        t_stat = a_hat / se
    else:
        t_stat = math.copysign(math.inf, a_hat) if a_hat != 0 else 0.0
    t_stat = float(np.clip(t_stat, -T_CAP, T_CAP))
    p_value = float(2.0 * sps.t.sf(abs(t_stat), dof))
    crit = float(sps.t.ppf(1.0 - alpha / 2.0, dof))
    r0 = ys - a_hat * xs
    xw = xv[t]
    num = math.sqrt(float(r0 @ r0) / (m - 1))
    den = math.sqrt(float(np.var(xw, ddof=1))) if t.size > 1 else 0.0
    f_hat = num / den if den > 0 else math.inf
    return SelfConsistencyResult(
        a_hat=a_hat,
        c_hat=c_hat,
        t_stat=t_stat,
        p_value=p_value,
        significant=bool(abs(t_stat) > crit),
        f_hat=float(f_hat),
        window=(start, length),
        n_points=m,
    )


def round_half_away(v):
    """Round to the nearest integer, ties away from zero; NaN stays NaN."""
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.floor(np.abs(v) + 0.5)


def path_to_lags(path: ThermalPath, n: Optional[int] = None) -> np.ndarray:
    """Per-observation integer lags of ``Y`` behind ``X`` from a thermal path.

    Level ``t`` with mean lag ``x`` sits over ``Y`` index ``(t + x) / 2``;
    levels landing on the same (rounded) index are averaged. Indices the
    path skips are filled by linear interpolation, indices outside its span
    and lags that would read ``X`` out of range are NaN.
    """
    n = path.n if n is None else int(n)
    ts = np.asarray(path.ts, dtype=np.float64)
    xs = np.asarray(path.xs, dtype=np.float64)
    idx = round_half_away((ts + xs) / 2.0).astype(np.int64)
    keep = (idx >= 0) & (idx < n)
    sums = np.bincount(idx[keep], weights=xs[keep], minlength=n)
    cnt = np.bincount(idx[keep], minlength=n)
    mean = np.full(n, np.nan)
    hit = cnt > 0
    mean[hit] = sums[hit] / cnt[hit]
    if hit.any():
        where = np.flatnonzero(hit)
        inner = np.arange(where[0], where[-1] + 1)
        mean[inner] = np.interp(inner, where, mean[where])
    lags = round_half_away(mean)
    src = np.arange(n) - np.where(np.isfinite(lags), lags, 0)
    lags[(src < 0) | (src >= n)] = np.nan
    return lags


# ---------------------------------------------------------------- signal map


@dataclass(frozen=True, eq=False)
class SignalMap:
    """``rho`` per ``(a, f)`` cell at one temperature; ``rho[i, j]`` is cell ``(a[i], f[j])``."""

    a_values: np.ndarray
    f_values: np.ndarray
    rho: np.ndarray = field(repr=False)
    temperature: float
    ensemble: int
    seed: int = 0
    method: str = "tops"

    def lookup(self, a: float, f: float) -> tuple[float, bool]:
        """Nearest-cell ``rho``; the flag is set when ``(a, f)`` lies off the grid."""
        i = int(np.argmin(np.abs(self.a_values - a)))
        j = int(np.argmin(np.abs(self.f_values - f)))
        off = not (self.a_values.min() <= a <= self.a_values.max() and self.f_values.min() <= f <= self.f_values.max())
        return float(self.rho[i, j]), off

    def same_grid(self, other: "SignalMap") -> bool:
        return np.array_equal(self.a_values, other.a_values) and np.array_equal(self.f_values, other.f_values)

    def to_dict(self) -> dict:
        return {
            "temperature": self.temperature,
            "ensemble": self.ensemble,
            "seed": self.seed,
            "method": self.method,
            "a": self.a_values.tolist(),
            "f": self.f_values.tolist(),
            "rho": self.rho.tolist(),
        }

    def rows(self) -> list[dict]:
        return [
            {"temperature": self.temperature, "a": float(a), "f": float(f), "rho": float(self.rho[i, j])}
            for i, a in enumerate(self.a_values)
            for j, f in enumerate(self.f_values)
        ]


def ensemble_free_energies(
    a: float,
    f: float,
    temperatures: Sequence[float],
    ensemble: int,
    seed=0,
    method=Method.TOPS,
    spec: BoundarySpec = BoundarySpec(),
    kind=DistanceKind.MINUS,
    b: float = 0.7,
    n_segments: int = 5,
    segment_length: int = 100,
    lag_range=(-30, 30),
    workers: int = 1,
    models: Optional[Sequence[PiecewiseLagModel]] = None,
):
    """Free energies of meaningful pairs and of their reshuffles.

    Member ``k`` draws random lags, the driver, the response noise and both
    reshuffles from seeds keyed on ``(seed, k)`` only, so members are shared
    across cells and temperatures. ``models`` overrides the random lag
    structures. ``a=None`` keeps each model's own coupling (drawn uniformly
    from ``[0.7, 1]`` for random models).

    Returns two arrays of shape ``(len(temperatures), ensemble)``.
    """
    temps = [float(T) for T in temperatures]
    method = Method.parse(method)

    def one(k):
        s_model, s_x, s_eta, s_rx, s_ry = _seed_for(seed, k).spawn(5)
        if models is None:
            base = gen_random_model(n_segments, lag_range, seed=s_model, segment_length=segment_length)
        else:
            base = models[k % len(models)]
        model = PiecewiseLagModel(base.segments, a=base.a if a is None else a, f=f, seed=s_eta)
        x, y = synthetic_pair(model, b=b, seed=s_x)
        xr = reshuffle(x.values, s_rx)
        yr = reshuffle(y.values, s_ry)
        e_sig = prepare_energy(x, y, kind)
        e_rnd = prepare_energy(xr, yr, kind)
        sig = [min_free_energy(e_sig, T, spec, method) for T in temps]
        rnd = [min_free_energy(e_rnd, T, spec, method) for T in temps]
        return sig, rnd

    out = _pool_map(one, range(int(ensemble)), workers)
    sig = np.array([o[0] for o in out]).T
    rnd = np.array([o[1] for o in out]).T
    return sig, rnd


def signal_maps(
    a_values=DEFAULT_GRID,
    f_values=DEFAULT_GRID,
    temperatures=(2.0,),
    ensemble: int = 100,
    seed=0,
    method=Method.TOPS,
    spec: BoundarySpec = BoundarySpec(),
    kind=DistanceKind.MINUS,
    workers: int = 1,
    **model_kw,
) -> list[SignalMap]:
    """One ``SignalMap`` per temperature, all built from the same ensembles."""
    a_arr = np.asarray(a_values, dtype=np.float64)
    f_arr = np.asarray(f_values, dtype=np.float64)
    temps = [float(T) for T in temperatures]
    method = Method.parse(method)
    rho = np.empty((len(temps), a_arr.size, f_arr.size))
    for i, a in enumerate(a_arr):
        for j, f in enumerate(f_arr):
            sig, rnd = ensemble_free_energies(a, f, temps, ensemble, seed, method, spec, kind, workers=workers, **model_kw)
            for k in range(len(temps)):
                rho[k, i, j] = rho_metric(sig[k], rnd[k]).rho
    maps = []
    for k, T in enumerate(temps):
        r = rho[k].copy()
        r.setflags(write=False)
        maps.append(SignalMap(a_arr, f_arr, r, T, int(ensemble), int(seed), method.value))
    return maps


def signal_map(a_values=DEFAULT_GRID, f_values=DEFAULT_GRID, T: float = 2.0, ensemble: int = 100, seed=0, **kw) -> SignalMap:
    """``rho`` over an ``(a, f)`` grid from random five-segment models at one temperature."""
    return signal_maps(a_values, f_values, (T,), ensemble, seed, **kw)[0]


def temperature_profile(maps: Sequence[SignalMap]) -> list[dict]:
    """Mean and population stdev of ``rho`` over all cells, one row per map."""
    maps = list(maps)
    if not maps:
        raise EmptySample("no maps given")
    for m in maps[1:]:
        if not maps[0].same_grid(m):
            raise GridMismatch("signal maps do not share one (a, f) grid")
    return [
        {"temperature": m.temperature, "mean_rho": float(m.rho.mean()), "std_rho": float(m.rho.std())}
        for m in maps
    ]


def _runs(lags: np.ndarray) -> tuple:
    """Piecewise-constant segments of an integer lag array (NaNs take the nearest value)."""
    v = np.asarray(lags, dtype=np.float64)
    good = np.flatnonzero(np.isfinite(v))
    if good.size == 0:
        raise LeadLagError("no usable lags")
    idx = np.arange(v.size)
    nearest = good[np.clip(np.searchsorted(good, idx), 0, good.size - 1)]
    left = good[np.clip(np.searchsorted(good, idx) - 1, 0, good.size - 1)]
    pick = np.where(np.abs(idx - left) <= np.abs(nearest - idx), left, nearest)
    filled = v[pick].astype(np.int64)
    cut = np.flatnonzero(np.diff(filled)) + 1
    ends = list(cut) + [v.size]
    return tuple((int(e), int(filled[e - 1])) for e in ends)


def rho_by_regeneration(
    lags,
    a: float,
    f: float,
    T: float = 2.0,
    ensemble: int = 100,
    seed=0,
    method=Method.TOPS,
    spec: BoundarySpec = BoundarySpec(),
    kind=DistanceKind.MINUS,
    b: float = 0.7,
    workers: int = 1,
) -> RhoResult:
    """``rho`` for a recovered lag structure from freshly simulated pairs.

    Each member copies a new AR(1) driver through the recovered per-index
    lags with coupling ``a`` and noise ratio ``f``; its free energy is set
    against that of its reshuffled counterpart.
    """
    model = PiecewiseLagModel(_runs(lags), a=a, f=f)
    sig, rnd = ensemble_free_energies(a, f, (T,), ensemble, seed, method, spec, kind, b=b, workers=workers, models=[model])
    return rho_metric(sig[0], rnd[0])


# --------------------------------------------------------------- window scan


@dataclass(frozen=True, eq=False)
class WindowScan:
    window_len: int
    step: int
    synchronized: list = field(repr=False)
    unsynchronized: list = field(repr=False)

    @property
    def n_windows(self) -> int:
        return len(self.synchronized)

    def n_significant(self, synchronized: bool = True) -> int:
        rows = self.synchronized if synchronized else self.unsynchronized
        return sum(1 for r in rows if r is not None and r.significant)

    def rows(self) -> list[dict]:
        out = []
        for mode, rows in (("synchronized", self.synchronized), ("unsynchronized", self.unsynchronized)):
            for r in rows:
                if r is not None:
                    out.append({"mode": mode, **r.to_dict()})
        return out

    def to_dict(self) -> dict:
        return {
            "window_len": self.window_len,
            "step": self.step,
            "n_windows": self.n_windows,
            "significant_synchronized": self.n_significant(True),
            "significant_unsynchronized": self.n_significant(False),
            "windows": self.rows(),
        }


def moving_window_scan(
    x,
    y,
    lags,
    window_len: int = 100,
    step: int = 1,
    smap: Optional[SignalMap] = None,
    alpha: float = 0.05,
) -> WindowScan:
    """Windowed regressions with the recovered lags and with zero lag.

    ``lags`` is a per-index lag array or a ``ThermalPath``. Windows with
    fewer than the minimum usable points are kept as ``None``.
    """
    yv = np.asarray(getattr(y, "values", y), dtype=np.float64)
    n = yv.size
    if isinstance(lags, ThermalPath):
        lags = path_to_lags(lags, n)
    if not 1 <= window_len <= n or step < 1:
        raise LeadLagError(f"window length {window_len} and step {step} do not fit a series of length {n}")
    zero = np.zeros(n)
    sync, unsync = [], []
    for s in range(0, n - window_len + 1, step):
        for target, lg in ((sync, lags), (unsync, zero)):
            try:
                r = regression_ttest(x, yv, lg, (s, window_len), alpha)
            except (InsufficientOverlap, DegenerateSeries):
                target.append(None)
                continue
            if smap is not None:
                rho, off = smap.lookup(r.a_hat, r.f_hat)
                r = SelfConsistencyResult(**{**r.__dict__, "rho_lookup": rho, "clamped": off})
            target.append(r)
    return WindowScan(window_len, step, sync, unsync)
