import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2

from kpzlab.asep import (
    AsepState, _bond, flip_height, height_from_occupancy, init_random_walk, is_local_max, is_local_min,
    jump_particle, replay_heights, rescale_weak_asymmetry, simulate_asep, weak_asymmetry_p,
)
from kpzlab.errors import DomainError, OutOfRangeError
from kpzlab.rng import RngSpec


def check_invariants(state):
    h = state.heights()
    assert np.all(np.abs(np.diff(h)) == 1)
    assert np.array_equal(-np.diff(h), state.eta)


def test_init_basics():
    s = init_random_walk(2, RngSpec(1))
    assert sorted(s.eta.tolist()) == [-1, 1]
    with pytest.raises(DomainError):
        init_random_walk(7, RngSpec(1))
    for i in range(20):
        s = init_random_walk(50, RngSpec(2, i))
        assert s.height_anchor == 0 and height_from_occupancy(s, 0) == 0
        assert s.eta.sum() == 0
        check_invariants(s)


def test_init_density():
    dens = np.array([(init_random_walk(1000, RngSpec(3, i), ring=False).eta == 1).mean() for i in range(10 ** 4)])
    assert abs(dens.mean() - 0.5) < 3 * 0.5 / math.sqrt(1000 * 10 ** 4)


def test_state_validation():
    with pytest.raises(DomainError):
        AsepState(np.array([1, 0, -1]), p=0.5)
    with pytest.raises(DomainError):
        AsepState(np.array([1, -1]), p=1.5)
    assert AsepState(np.array([1, -1]), p=0.3).q == pytest.approx(0.7)


def test_height_examples():
    L = 10
    holes = AsepState(-np.ones(L), p=0.5, height_anchor=3, ring=False)
    parts = AsepState(np.ones(L), p=0.5, height_anchor=3, ring=False)
    alt = AsepState(np.array([1, -1] * 5), p=0.5, height_anchor=0)
    for x in range(L + 1):
        assert height_from_occupancy(holes, x) == 3 + x
        assert height_from_occupancy(parts, x) == 3 - x
    assert all(abs(height_from_occupancy(alt, x)) <= 1 for x in range(-L, L + 1))
    assert height_from_occupancy(alt, -1) == height_from_occupancy(alt, L - 1)
    with pytest.raises(OutOfRangeError):
        height_from_occupancy(holes, L + 1)
    with pytest.raises(OutOfRangeError):
        height_from_occupancy(alt, -L - 1)


def test_extrema_and_jumps():
    s = AsepState(np.array([1, -1, -1, 1]), p=0.5)
    assert is_local_min(s, 1) and is_local_max(s, 3) and not is_local_min(s, 2) and not is_local_max(s, 0)
    jump_particle(s, 0, 1)
    assert s.eta.tolist() == [-1, 1, -1, 1] and s.right_jumps == 1
    with pytest.raises(DomainError):
        jump_particle(s, 0, 1)
    # crossing the wrap bond shifts h(0) by 2 and keeps h periodic
    s = AsepState(np.array([-1, -1, 1, 1]), p=0.5)
    jump_particle(s, 3, 1)
    assert s.height_anchor == 2
    check_invariants(s)
    jump_particle(s, 0, -1)
    assert s.height_anchor == 0 and s.left_jumps == 1
    seg = AsepState(np.array([1, -1]), p=0.5, ring=False)
    assert _bond(seg, 0) is None
    with pytest.raises(DomainError):
        jump_particle(seg, 0, -1)


def test_flip_height():
    h = np.array([0, -1, 0, 1])
    flip_height(h, 1)
    assert h.tolist() == [0, 1, 0, 1]
    with pytest.raises(DomainError):
        flip_height(np.array([0, 1, 2, 1]), 1)


def test_zero_duration_unchanged():
    s = init_random_walk(20, RngSpec(4))
    out = simulate_asep(s, 0.0, RngSpec(5))
    assert np.array_equal(out.eta, s.eta) and out.events == 0
    with pytest.raises(ValueError):
        simulate_asep(out, -1.0, RngSpec(5))


@given(st.integers(1, 20).map(lambda k: 2 * k), st.floats(0.0, 1.0), st.integers(0, 2 ** 32))
@settings(max_examples=60, deadline=None)
def test_invariants_and_duality(L, p, seed):
    s0 = init_random_walk(L, RngSpec(seed), p=p)
    events = []
    final = simulate_asep(s0, 5.0, RngSpec(seed, 1), record=events)
    assert final.eta.sum() == 0 and final.events == len(events)
    # particle picture driven by the recorded sequence
    s = s0.copy()
    heights = replay_heights(s0.heights()[:-1], events)
    times = [e[0] for e in events]
    assert times == sorted(times) and all(t < 5.0 for t in times)
    for (t, x, kind), h in zip(events, heights):
        b = _bond(s, x)
        if kind == "up":
            jump_particle(s, b[0], 1)
        else:
            jump_particle(s, b[1], -1)
        check_invariants(s)
        assert np.array_equal(s.heights()[:-1], h)
    assert np.array_equal(s.eta, final.eta) and s.height_anchor == final.height_anchor


def test_segment_closed_ends():
    s0 = init_random_walk(30, RngSpec(6), p=0.8, ring=False)
    n = s0.eta.sum()
    out = simulate_asep(s0, 20.0, RngSpec(7))
    assert out.eta.sum() == n and out.height_anchor == s0.height_anchor
    check_invariants(out)


def test_reproducible():
    s = init_random_walk(40, RngSpec(8), p=0.7)
    a = simulate_asep(s, 10.0, RngSpec(9))
    b = simulate_asep(s, 10.0, RngSpec(9))
    assert np.array_equal(a.eta, b.eta) and a.events == b.events


def test_totally_asymmetric_single_particle():
    L, T, runs = 64, 5.0, 10 ** 4
    eta = -np.ones(L, dtype=int)
    eta[0] = 1
    disp = []
    for i in range(runs):
        out = simulate_asep(AsepState(eta, p=1.0), T, RngSpec(10, i))
        disp.append(out.right_jumps)
    disp = np.array(disp)
    assert abs(disp.mean() - T) < 3 * math.sqrt(T / runs)


def test_flip_rate_audit():
    p = 0.7
    out = simulate_asep(init_random_walk(100, RngSpec(11), p=p), 400.0, RngSpec(12))
    n = out.events
    assert abs(out.right_jumps / n - p) < 3 * math.sqrt(p * (1 - p) / n)
    assert abs(out.left_jumps / n - (1 - p)) < 3 * math.sqrt(p * (1 - p) / n)


def test_stationarity_small():
    L, runs = 12, 2000
    counts = np.zeros(L)
    for i in range(runs):
        s = init_random_walk(L, RngSpec(13, i))
        counts += simulate_asep(s, 3.0, RngSpec(14, i)).eta == 1
    stat = ((counts - runs / 2) ** 2 / (runs / 4)).sum() * (L - 1) / L
    assert chi2.sf(stat, L - 1) > 0.001


def test_rescale_weak_asymmetry():
    s = init_random_walk(10, RngSpec(15), p=1.0)
    assert rescale_weak_asymmetry(s, 1.0, 0.0, 0.0) == 0.0
    with pytest.raises(DomainError):
        rescale_weak_asymmetry(init_random_walk(10, RngSpec(15), p=0.5), 0.1, 0.0, 0.0)
    with pytest.raises(OutOfRangeError):
        rescale_weak_asymmetry(init_random_walk(10, RngSpec(15), p=weak_asymmetry_p(0.5)), 0.5, 1.0, 0.0)
    eps, x = 0.1, 0.5
    vals = [rescale_weak_asymmetry(init_random_walk(200, RngSpec(16, i), p=weak_asymmetry_p(eps), ring=False),
                                   eps, 0.0, x) for i in range(4000)]
    assert np.var(vals) == pytest.approx(x, rel=0.08)
    T = 0.001
    s = init_random_walk(100, RngSpec(17), p=weak_asymmetry_p(eps))
    out = simulate_asep(s, T / eps ** 4, RngSpec(18))
    val = rescale_weak_asymmetry(out, eps, T, 0.2)
    assert val == pytest.approx(eps * height_from_occupancy(out, 20) - T / (2 * eps ** 2))


def test_csv_and_metadata():
    s = init_random_walk(6, RngSpec(19))
    lines = s.to_csv().splitlines()
    assert lines[0] == "x,eta,h" and len(lines) == 7
    assert set(s.metadata()) >= {"p", "q", "L", "T", "events"}
    with pytest.raises(DomainError):
        weak_asymmetry_p(0.0)
