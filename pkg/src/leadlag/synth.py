"""
Synthetic benchmark pairs: an AR(1) driver ``X`` and a response ``Y`` that
copies ``X`` with a lag that changes from segment to segment.

Randomness comes from numpy's counter-based Philox bit generator; normal
variates use numpy's ziggurat sampler (``Generator.standard_normal``). Both
are fixed by the seed, so every generator here is a pure function of its
parameters and seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidCoefficient, LagOutOfRange, LeadLagError
from .series import TimeSeries

__all__ = [
    "make_rng",
    "Ar1Params",
    "PiecewiseLagModel",
    "gen_ar1",
    "gen_piecewise",
    "gen_random_model",
    "reshuffle",
    "synthetic_pair",
    "paper_model",
    "BURN_IN",
    "child_seeds",
    "paper_pair",
]

# extra warm-up samples in front of the lag margin
BURN_IN = 100


def make_rng(seed) -> np.random.Generator:
    """Seeded Philox generator; accepts ints, SeedSequences or Generators."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class Ar1Params:
    length: int
    b: float = 0.7
    sigma_xi: float = 1.0
    seed: Optional[int] = 0

    def __post_init__(self):
        if not abs(self.b) < 1:
            raise InvalidCoefficient(f"AR coefficient must satisfy |b| < 1, got {self.b}")
        if not self.sigma_xi > 0:
            raise InvalidCoefficient(f"innovation stdev must be positive, got {self.sigma_xi}")
        if int(self.length) < 2:
            raise LeadLagError(f"length must be at least 2, got {self.length}")


def gen_ar1(p: Ar1Params) -> TimeSeries:
    """``X(t) = b X(t-1) + xi`` started from its stationary law."""
    rng = make_rng(p.seed)
    n = int(p.length)
    xi = rng.standard_normal(n) * p.sigma_xi
    out = np.empty(n)
    out[0] = xi[0] / np.sqrt(1.0 - p.b * p.b)
    for i in range(1, n):
        out[i] = p.b * out[i - 1] + xi[i]
    meta = {"source": "ar1", "b": p.b, "sigma_xi": p.sigma_xi, "seed": p.seed}
    return TimeSeries(out, meta=meta)


@dataclass(frozen=True)
class PiecewiseLagModel:
    """``Y(i) = a X(i - lag_j) + eta`` on segment ``j``.

    ``segments`` holds ``(end_index, lag)`` pairs with exclusive, strictly
    increasing end indices; the last end index is the series length. The
    noise has stdev ``f * sigma_xi``.
    """

    segments: tuple
    a: float = 0.8
    f: float = 0.2
    seed: Optional[int] = 0

    def __post_init__(self):
        segs = tuple((int(e), int(lag)) for e, lag in self.segments)
        if not segs:
            raise LeadLagError("model needs at least one segment")
        ends = [e for e, _ in segs]
        if ends[0] <= 0 or any(b <= a for a, b in zip(ends, ends[1:])):
            raise LeadLagError(f"segment end indices must be positive and strictly increasing: {ends}")
        if self.f < 0:
            raise LeadLagError(f"noise ratio must be nonnegative, got {self.f}")
        object.__setattr__(self, "segments", segs)

    @property
    def length(self) -> int:
        return self.segments[-1][0]

    @property
    def lags(self) -> tuple:
        return tuple(lag for _, lag in self.segments)

    @property
    def max_lag(self) -> int:
        return max(abs(lag) for lag in self.lags)

    def lag_per_index(self) -> np.ndarray:
        out = np.empty(self.length, dtype=np.int64)
        lo = 0
        for end, lag in self.segments:
            out[lo:end] = lag
            lo = end
        return out

    def to_dict(self) -> dict:
        return {"segments": [list(s) for s in self.segments], "a": self.a, "f": self.f, "seed": self.seed}


def gen_piecewise(x, model: PiecewiseLagModel, offset: int, sigma_xi: float = 1.0) -> TimeSeries:
    """Response series for a driver whose sample ``X(i)`` sits at ``x[offset + i]``.

    The driver must extend at least ``max lag`` samples past both ends of
    the response window.
    """
    xv = np.asarray(getattr(x, "values", x), dtype=np.float64)
    n = model.length
    lag = model.lag_per_index()
    src = offset + np.arange(n) - lag
    if src.min() < 0 or src.max() >= xv.size:
        raise LagOutOfRange(
            f"driver of length {xv.size} with offset {offset} cannot serve lags up to {model.max_lag}"
        )
    rng = make_rng(model.seed)
    eta = rng.standard_normal(n) * (model.f * sigma_xi)
    y = model.a * xv[src] + eta
    meta = {"source": "piecewise", "model": model.to_dict()}
    return TimeSeries(y, meta=meta)


def synthetic_pair(model: PiecewiseLagModel, b: float = 0.7, sigma_xi: float = 1.0, seed=0):
    """Driver ``X`` and response ``Y`` of ``model.length`` samples each.

    ``X`` is generated with ``max_lag + BURN_IN`` samples in front and
    ``max_lag`` behind the returned window so every lag has valid history.
    """
    n = model.length
    pre = model.max_lag + BURN_IN
    post = model.max_lag
    full = gen_ar1(Ar1Params(length=pre + n + post, b=b, sigma_xi=sigma_xi, seed=seed))
    y = gen_piecewise(full, model, offset=pre, sigma_xi=sigma_xi)
    meta = {"source": "ar1", "b": b, "sigma_xi": sigma_xi, "seed": seed}
    x = TimeSeries(full.values[pre : pre + n], meta=meta)
    return x, y


def gen_random_model(
    n_segments: int = 5,
    lag_range: Sequence[int] = (-30, 30),
    a_range: Sequence[float] = (0.7, 1.0),
    seed=0,
    segment_length: int = 100,
    f: float = 0.2,
    a: Optional[float] = None,
    noise_seed=None,
) -> PiecewiseLagModel:
    """Model with uniform integer lags in ``lag_range`` (inclusive) and uniform ``a``.

    Passing ``a`` fixes the coupling instead of drawing it.
    """
    lo, hi = int(lag_range[0]), int(lag_range[1])
    if hi < lo or a_range[1] < a_range[0] or n_segments < 1:
        raise LeadLagError("empty parameter range")
    rng = make_rng(seed)
    lags = rng.integers(lo, hi + 1, size=n_segments)
    a_draw = rng.uniform(a_range[0], a_range[1])
    segs = tuple(((j + 1) * segment_length, int(lags[j])) for j in range(n_segments))
    return PiecewiseLagModel(segs, a=float(a_draw if a is None else a), f=f, seed=noise_seed if noise_seed is not None else seed)


def reshuffle(series, seed=0):
    """Uniformly random permutation of the values.

    A ``TimeSeries`` comes back as a ``TimeSeries`` with the transform
    recorded; anything else comes back as a plain array.
    """
    rng = make_rng(seed)
    values = np.asarray(getattr(series, "values", series), dtype=np.float64)
    out = values[rng.permutation(values.size)]
    if isinstance(series, TimeSeries):
        return series.derive(out, "reshuffle")
    return out


_PAPER_MODELS = {
    "A": ((30, 15, 0, -15, -30), 100),
    "B": ((30, 15, 0, -15, -30), 200),
    "C": ((60, 30, 0, -30, -60), 200),
}


def paper_model(name: str = "A", a: float = 0.8, f: float = 0.2, seed=0) -> PiecewiseLagModel:
    """The five-segment benchmark models.

    ``A``: lags 30, 15, 0, -15, -30 over 100-step segments. ``B``: same lags
    over 200-step segments. ``C``: doubled lags over 200-step segments.
    """
    try:
        lags, seg = _PAPER_MODELS[name.upper()]
    except KeyError:
        raise LeadLagError(f"unknown model {name!r}; expected one of {sorted(_PAPER_MODELS)}") from None
    segs = tuple(((j + 1) * seg, lag) for j, lag in enumerate(lags))
    return PiecewiseLagModel(segs, a=a, f=f, seed=seed)


def child_seeds(seed, k: int = 2) -> list[int]:
    """``k`` independent integer seeds derived from one master seed."""
    words = np.random.SeedSequence(int(seed)).generate_state(k, dtype=np.uint32)
    return [int(w) for w in words]


def paper_pair(name: str = "A", seed=0, a: float = 0.8, f: float = 0.2, b: float = 0.7):
    """``(x, y, model)`` for a benchmark model with driver and noise seeds split from ``seed``."""
    s_x, s_eta = child_seeds(seed)
    model = paper_model(name, a=a, f=f, seed=s_eta)
    x, y = synthetic_pair(model, b=b, seed=s_x)
    return x, y, model
