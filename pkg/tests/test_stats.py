import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from kpzlab.errors import DomainError
from kpzlab.rng import RngSpec
from kpzlab.stats import (
    EmpiricalSample, center_scale_lis, empirical_cdf, fit_exponent, ks_statistic, lis_monte_carlo,
    lis_trial, summary,
)


def uniform_cdf(x):
    return np.clip(x, 0.0, 1.0)


def test_sample_invariants():
    with pytest.raises(ValueError):
        EmpiricalSample(np.array([1.0, np.inf]))
    with pytest.raises(ValueError):
        EmpiricalSample(np.array([1.0, 2.0]), {"n": 3})
    s = EmpiricalSample([3.0, 1.0], {"n": 2})
    assert len(s) == 2 and not s.draws.flags.writeable


def test_csv_round_trip():
    s = EmpiricalSample(np.array([0.1, 1 / 3, -2.5]))
    back = EmpiricalSample.from_csv(s.to_csv())
    assert np.array_equal(back.draws, s.draws)


def test_center_scale():
    assert center_scale_lis([200], 10000).draws[0] == 0.0
    N = 7.3
    assert center_scale_lis([2 * math.sqrt(N)], N).draws[0] == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DomainError):
        center_scale_lis([1], 0)


@given(st.lists(st.integers(0, 500), min_size=2, max_size=40), st.floats(1.0, 1e5))
def test_center_scale_preserves_order(lengths, N):
    out = center_scale_lis(lengths, N).draws
    assert np.array_equal(np.argsort(lengths, kind="stable"), np.argsort(out, kind="stable"))


def test_ecdf():
    F = empirical_cdf(EmpiricalSample([5.0]))
    assert F(4.999) == 0.0 and F(5.0) == 1.0
    assert empirical_cdf(EmpiricalSample([1.0, 2.0, 3.0]))(2.0) == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        empirical_cdf(EmpiricalSample([]))


def test_ecdf_uniform_dkw():
    s = EmpiricalSample(RngSpec(1).generator().random(10 ** 4))
    F = empirical_cdf(s)
    grid = np.linspace(0, 1, 5001)
    assert np.max(np.abs(F(grid) - grid)) < 1.36 / 100


def test_ks_against_scipy():
    g = RngSpec(2).generator()
    for n in (5, 50, 500):
        x = g.normal(size=n)
        assert ks_statistic(EmpiricalSample(x), sps.norm.cdf) == pytest.approx(
            sps.kstest(x, "norm").statistic, abs=1e-13)


def test_ks_examples():
    s = EmpiricalSample(RngSpec(3).generator().random(10 ** 4))
    assert ks_statistic(s, uniform_cdf) < 0.02
    c = 0.3
    assert ks_statistic(EmpiricalSample(np.full(20, c)), uniform_cdf) == pytest.approx(max(c, 1 - c))
    x = EmpiricalSample([0.2, 0.5, 0.9])
    assert ks_statistic(x, empirical_cdf(x)) == 0.0
    with pytest.raises(DomainError):
        ks_statistic(x, lambda t: 1 - uniform_cdf(t))
    with pytest.raises(ValueError):
        ks_statistic(EmpiricalSample([]), uniform_cdf)


@given(st.floats(0.1, 10.0), st.floats(-5.0, 5.0), st.integers(0, 2 ** 32))
@settings(max_examples=50, deadline=None)
def test_ks_affine_equivariance(a, b, seed):
    x = RngSpec(seed).generator().normal(size=200)
    base = ks_statistic(EmpiricalSample(x), sps.norm.cdf)
    moved = ks_statistic(EmpiricalSample(a * x + b), lambda y: sps.norm.cdf((y - b) / a))
    assert moved == pytest.approx(base, abs=1e-12)


def test_fit_exponent():
    ts = np.array([50.0, 100.0, 200.0, 400.0])
    slope, se = fit_exponent(list(zip(ts, ts ** (2 / 3))))
    assert slope == pytest.approx(2 / 3, abs=1e-12) and se < 1e-12
    slope, se = fit_exponent(list(zip(ts, np.full(4, 3.0))))
    assert slope == pytest.approx(0.0, abs=1e-12)
    for bad in ([(1, 1), (2, 2)], [(1, 1), (2, -1), (3, 3)], [(0, 1), (2, 1), (3, 1)]):
        with pytest.raises(DomainError):
            fit_exponent(bad)


@given(st.floats(-3, 3), st.floats(0.01, 100.0))
def test_fit_recovers_power(alpha, c):
    ts = [1.5, 3.0, 7.0, 20.0]
    slope, _ = fit_exponent([(t, c * t ** alpha) for t in ts])
    assert abs(slope - alpha) < 1e-12


def test_fit_stderr_matches_linregress():
    g = RngSpec(4).generator()
    t = np.array([1.0, 2, 4, 8, 16])
    v = t ** 0.5 * np.exp(g.normal(0, 0.1, 5))
    slope, se = fit_exponent(list(zip(t, v)))
    ref = sps.linregress(np.log(t), np.log(v))
    assert slope == pytest.approx(ref.slope) and se == pytest.approx(ref.stderr)


def test_summary_keys():
    s = EmpiricalSample([1.0, 2.0, 4.0])
    out = summary(s, uniform_cdf, (0.7, 0.01))
    assert set(out) == {"mean", "var", "ks", "exponent", "stderr", "n"}
    assert out["mean"] == pytest.approx(7 / 3) and out["n"] == 3


def test_lis_monte_carlo():
    a = lis_monte_carlo(50, 30, RngSpec(5))
    assert np.array_equal(a, lis_monte_carlo(50, 30, RngSpec(5)))
    assert np.array_equal(a[10:], lis_monte_carlo(50, 20, RngSpec(5, 10)))
    assert a[3] == lis_trial(50, RngSpec(5, 3))
    fixed = lis_monte_carlo(64, 200, RngSpec(6), poissonized=False)
    assert fixed.min() >= 1 and fixed.max() <= 64
    assert abs(fixed.mean() - 2 * 8 + 1.77 * 2) < 1.5
    with pytest.raises(DomainError):
        lis_monte_carlo(10.5, 3, RngSpec(1), poissonized=False)
    with pytest.raises(DomainError):
        lis_monte_carlo(0, 3, RngSpec(1))
