import numpy as np
import pytest
from scipy import stats as sps

from leadlag.errors import InvalidCoefficient, LagOutOfRange, LeadLagError
from leadlag.series import TimeSeries
from leadlag.synth import (
    BURN_IN,
    Ar1Params,
    PiecewiseLagModel,
    child_seeds,
    gen_ar1,
    gen_piecewise,
    gen_random_model,
    make_rng,
    paper_model,
    paper_pair,
    reshuffle,
    synthetic_pair,
)


def lag1(v):
    v = v - v.mean()
    return float(v[1:] @ v[:-1] / (v @ v))


def test_white_noise_autocorrelation():
    n = 4000
    x = gen_ar1(Ar1Params(n, b=0.0, seed=1)).values
    assert abs(lag1(x)) < 3 / np.sqrt(n)


def test_ar1_autocorrelation():
    x = gen_ar1(Ar1Params(10000, b=0.7, seed=2)).values
    assert abs(lag1(x) - 0.7) <= 0.03


def test_ar1_deterministic():
    a = gen_ar1(Ar1Params(500, seed=3)).values
    b = gen_ar1(Ar1Params(500, seed=3)).values
    c = gen_ar1(Ar1Params(500, seed=4)).values
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_ar1_stationary_start():
    # the first sample has the stationary variance 1 / (1 - b^2)
    first = np.array([gen_ar1(Ar1Params(2, b=0.9, seed=s)).values[0] for s in range(3000)])
    assert np.var(first) == pytest.approx(1 / (1 - 0.81), rel=0.1)


@pytest.mark.parametrize("b", [1.0, -1.0, 1.5])
def test_ar1_rejects_nonstationary(b):
    with pytest.raises(InvalidCoefficient):
        Ar1Params(100, b=b)


def test_ar1_rejects_bad_sigma():
    with pytest.raises(InvalidCoefficient):
        Ar1Params(100, sigma_xi=0.0)


def test_identity_coupling():
    x = gen_ar1(Ar1Params(300, seed=5))
    m = PiecewiseLagModel(((300, 0),), a=1.0, f=0.0)
    y = gen_piecewise(x, m, offset=0)
    np.testing.assert_array_equal(y.values, x.values)


def test_noiseless_segments_are_shifted_copies():
    m = PiecewiseLagModel(((100, 7), (200, -4), (300, 0)), a=1.0, f=0.0)
    x, y = synthetic_pair(m, seed=6)
    full = gen_ar1(Ar1Params(m.max_lag + BURN_IN + 300 + m.max_lag, seed=6)).values
    pre = m.max_lag + BURN_IN
    np.testing.assert_array_equal(x.values, full[pre : pre + 300])
    for (lo, hi), lag in zip([(0, 100), (100, 200), (200, 300)], m.lags):
        i = np.arange(lo, hi)
        np.testing.assert_array_equal(y.values[i], full[pre + i - lag])


def test_noise_level():
    m = PiecewiseLagModel(((5000, 0),), a=0.0, f=0.3, seed=7)
    y = gen_piecewise(np.zeros(5000), m, offset=0)
    assert np.std(y.values) == pytest.approx(0.3, rel=0.05)


def test_lag_out_of_range():
    m = PiecewiseLagModel(((50, 10),), a=1.0)
    with pytest.raises(LagOutOfRange):
        gen_piecewise(np.zeros(55), m, offset=5)


def test_segments_validated():
    with pytest.raises(LeadLagError):
        PiecewiseLagModel(((100, 0), (100, 5)))
    with pytest.raises(LeadLagError):
        PiecewiseLagModel(())


def test_paper_models():
    a = paper_model("A")
    assert a.lags == (30, 15, 0, -15, -30) and a.length == 500
    assert (a.a, a.f) == (0.8, 0.2)
    b = paper_model("B")
    assert b.lags == a.lags and b.length == 1000
    c = paper_model("C")
    assert c.lags == (60, 30, 0, -30, -60) and c.length == 1000
    with pytest.raises(LeadLagError):
        paper_model("D")


def test_paper_pair_seeds_split():
    x, y, m = paper_pair("A", seed=0)
    s_x, s_eta = child_seeds(0)
    assert s_x != s_eta and m.seed == s_eta
    assert len(x) == len(y) == 500
    x2, y2, _ = paper_pair("A", seed=0)
    np.testing.assert_array_equal(y.values, y2.values)


def test_lag_per_index():
    m = PiecewiseLagModel(((3, 1), (5, -2)))
    assert m.lag_per_index().tolist() == [1, 1, 1, -2, -2]


def test_random_model_reproducible():
    assert gen_random_model(seed=11) == gen_random_model(seed=11)
    assert gen_random_model(seed=11) != gen_random_model(seed=12)


def test_random_model_lags_uniform():
    lags = np.concatenate([gen_random_model(seed=s).lags for s in range(1000)])
    counts = np.bincount(lags + 30, minlength=61)
    assert counts.size == 61
    assert sps.chisquare(counts).pvalue > 0.01


def test_random_model_a_range():
    a = np.array([gen_random_model(seed=s).a for s in range(500)])
    assert a.min() >= 0.7 and a.max() <= 1.0


def test_random_model_fixed_a():
    assert gen_random_model(seed=1, a=0.3).a == 0.3


def test_reshuffle_preserves_multiset():
    x = gen_ar1(Ar1Params(200, seed=8))
    r = reshuffle(x, seed=9)
    assert isinstance(r, TimeSeries)
    np.testing.assert_array_equal(np.sort(r.values), np.sort(x.values))
    assert r.values.mean() == pytest.approx(x.values.mean(), rel=1e-12)
    assert r.values.var() == pytest.approx(x.values.var(), rel=1e-12)
    assert not np.array_equal(r.values, x.values)


def test_reshuffle_length_one():
    assert reshuffle(np.array([4.2]), seed=1).tolist() == [4.2]


def test_reshuffle_seeds_differ():
    v = np.arange(50.0)
    assert not np.array_equal(reshuffle(v, 1), reshuffle(v, 2))
    np.testing.assert_array_equal(reshuffle(v, 1), reshuffle(v, 1))


def test_make_rng_passes_generators():
    g = make_rng(3)
    assert make_rng(g) is g
    assert isinstance(g.bit_generator, np.random.Philox)
