import itertools
import math
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpzlab.combinatorics import (
    Partition, Permutation, ResourceLimitError, cauchy_normalization, dim_partition,
    enumerate_partitions, lis_histogram, lis_length, lis_length_of, lis_witness,
    plancherel_pmf, pmf_to_json, rsk, rsk_shape, schur_jacobi_trudi, schur_measure_partial_sums,
    schur_measure_weight, schur_poly, _schur_branching,
)
from kpzlab.errors import DomainError


# --- oracles ------------------------------------------------------------------

def lis_by_subsets(vals):
    n = len(vals)
    for k in range(n, 0, -1):
        for idx in itertools.combinations(range(n), k):
            if all(vals[a] < vals[b] for a, b in zip(idx, idx[1:])):
                return k
    return 0


def count_syt(shape):
    """Standard tableaux counted by removing corners one at a time."""
    shape = tuple(shape)

    def rec(sh):
        if sum(sh) == 0:
            return 1
        total = 0
        for i, r in enumerate(sh):
            nxt = sh[i + 1] if i + 1 < len(sh) else 0
            if r > nxt:
                total += rec(sh[:i] + (r - 1,) + sh[i + 1:])
        return total

    return rec(shape)


def schur_by_ssyt(shape, xs):
    """Sum of x^T over semistandard fillings, built cell by cell."""
    cells = [(i, j) for i, r in enumerate(shape) for j in range(r)]
    m = len(xs)
    total = 0.0
    fill = {}

    def rec(k, weight):
        nonlocal total
        if k == len(cells):
            total += weight
            return
        i, j = cells[k]
        lo = 1
        if j > 0:
            lo = max(lo, fill[(i, j - 1)])
        if i > 0:
            lo = max(lo, fill[(i - 1, j)] + 1)
        for v in range(lo, m + 1):
            fill[(i, j)] = v
            rec(k + 1, weight * xs[v - 1])
        fill.pop((i, j), None)

    rec(0, 1.0)
    return total


def partition_count(n):
    # p(n) by Euler's pentagonal recurrence
    p = [1] + [0] * n
    for k in range(1, n + 1):
        s, j = 0, 1
        while True:
            g1 = j * (3 * j - 1) // 2
            if g1 > k:
                break
            sign = 1 if j % 2 else -1
            s += sign * p[k - g1]
            g2 = j * (3 * j + 1) // 2
            if g2 <= k:
                s += sign * p[k - g2]
            j += 1
        p[k] = s
    return p[n]


perms = st.integers(1, 12).flatmap(lambda n: st.permutations(list(range(1, n + 1))))


# --- types --------------------------------------------------------------------

def test_permutation_validation():
    with pytest.raises(ValueError):
        Permutation((1, 1, 2))
    with pytest.raises(ValueError):
        Permutation((0, 1))
    assert Permutation.parse("1,3,6,2,5,4").values == (1, 3, 6, 2, 5, 4)
    assert Permutation.parse("(2, 1)").values == (2, 1)


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition((1, 2))
    with pytest.raises(ValueError):
        Partition((2, 0))
    lam = Partition((3, 1, 1))
    assert lam.size == 5 and lam.first_row == 3
    assert lam.conjugate().parts == (3, 1, 1)
    assert Partition((4, 2)).conjugate().parts == (2, 2, 1, 1)
    assert Partition(()).size == 0


# --- LIS ----------------------------------------------------------------------

def test_lis_examples():
    assert lis_length(Permutation((1, 3, 6, 2, 5, 4))) == 3
    assert lis_length(Permutation(tuple(range(1, 9)))) == 8
    assert lis_length(Permutation((3, 2, 1))) == 1


def test_lis_matches_subset_search_for_all_4_perms():
    for p in itertools.permutations(range(1, 5)):
        assert lis_length(Permutation(p)) == lis_by_subsets(p)


def test_witness_examples():
    w = lis_witness(Permutation((1, 3, 6, 2, 5, 4)))
    vals = [(1, 3, 6, 2, 5, 4)[i - 1] for i in w]
    assert len(w) == 3 and vals == sorted(vals) and list(w) == sorted(w)
    assert lis_witness(Permutation((1,))) == (1,)
    w = lis_witness(Permutation((2, 1, 4, 3)))
    assert tuple((2, 1, 4, 3)[i - 1] for i in w) in {(1, 4), (1, 3), (2, 4), (2, 3)}


@given(perms)
@settings(max_examples=200, deadline=None)
def test_witness_is_increasing_and_longest(vals):
    perm = Permutation(tuple(vals))
    w = lis_witness(perm)
    assert len(w) == lis_length(perm)
    assert all(a < b for a, b in zip(w, w[1:]))
    assert all(vals[a - 1] < vals[b - 1] for a, b in zip(w, w[1:]))


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), max_size=9))
@settings(max_examples=200, deadline=None)
def test_lis_of_reals_matches_subsets(seq):
    assert lis_length_of(seq) == lis_by_subsets(seq)


# --- partitions and dimensions -------------------------------------------------

def test_enumerate_small():
    assert [p.parts for p in enumerate_partitions(3)] == [(3,), (2, 1), (1, 1, 1)]
    assert [p.parts for p in enumerate_partitions(1)] == [(1,)]
    assert len(list(enumerate_partitions(5))) == 7


@pytest.mark.parametrize("n", [2, 6, 10, 17, 25])
def test_enumerate_counts_and_order(n):
    parts = [p.parts for p in enumerate_partitions(n)]
    assert len(parts) == partition_count(n)
    assert len(set(parts)) == len(parts)
    assert parts == sorted(parts, reverse=True)
    assert all(sum(p) == n for p in parts)


def test_partition_cap():
    with pytest.raises(ResourceLimitError):
        list(enumerate_partitions(41))
    assert len(list(enumerate_partitions(41, cap=41))) == partition_count(41)


def test_dim_examples():
    assert dim_partition(Partition((2, 1))) == 2
    assert dim_partition(Partition((2, 2))) == 2
    assert dim_partition(Partition((7,))) == 1
    assert dim_partition(Partition((1,) * 7)) == 1


def test_dim_matches_tableau_backtracking_up_to_12():
    for n in range(1, 13):
        for lam in enumerate_partitions(n):
            assert dim_partition(lam) == count_syt(lam.parts), lam


@pytest.mark.parametrize("n", range(1, 21))
def test_dim_square_sum(n):
    assert sum(dim_partition(l) ** 2 for l in enumerate_partitions(n)) == math.factorial(n)


# --- Plancherel ---------------------------------------------------------------

def test_plancherel_examples():
    assert plancherel_pmf(3) == {1: Fraction(1, 6), 2: Fraction(4, 6), 3: Fraction(1, 6)}
    assert plancherel_pmf(1) == {1: Fraction(1)}


@pytest.mark.parametrize("n", range(1, 8))
def test_plancherel_matches_histogram(n):
    pmf = plancherel_pmf(n)
    assert pmf == lis_histogram(n)
    assert sum(pmf.values()) == 1


def test_lis_histogram_is_independent_count():
    counts = Counter(lis_by_subsets(p) for p in itertools.permutations(range(1, 6)))
    assert lis_histogram(5) == {k: Fraction(v, 120) for k, v in counts.items()}


def test_pmf_json():
    doc = pmf_to_json(3, plancherel_pmf(3))
    assert doc["N"] == 3
    assert doc["pmf"][0] == {"l": 1, "num": "1", "den": "6"}
    big = pmf_to_json(30, plancherel_pmf(30))
    assert all(isinstance(e["num"], str) and isinstance(e["den"], str) for e in big["pmf"])
    assert sum(Fraction(int(e["num"]), int(e["den"])) for e in big["pmf"]) == 1


# --- RSK ----------------------------------------------------------------------

def test_rsk_examples():
    assert rsk_shape(Permutation((1, 3, 6, 2, 5, 4))).first_row == 3
    assert rsk_shape(Permutation((1, 2, 3))).parts == (3,)
    assert rsk_shape(Permutation((3, 2, 1))).parts == (1, 1, 1)


def test_rsk_exhaustive_bridge():
    for n in range(1, 7):
        for p in itertools.permutations(range(1, n + 1)):
            perm = Permutation(p)
            assert rsk_shape(perm).first_row == lis_length(perm)


@given(perms)
@settings(max_examples=200, deadline=None)
def test_rsk_tableaux_are_standard_and_bijective(vals):
    P, Q = rsk(vals)
    n = len(vals)
    for T in (P, Q):
        assert sorted(v for row in T for v in row) == list(range(1, n + 1))
        assert all(row == sorted(row) for row in T)
        for r1, r2 in zip(T, T[1:]):
            assert len(r2) <= len(r1)
            assert all(a < b for a, b in zip(r1, r2))
    assert [len(r) for r in P] == [len(r) for r in Q]


def test_rsk_is_injective_on_s5():
    pairs = {tuple(map(tuple, P)) + ("|",) + tuple(map(tuple, Q))
             for P, Q in (rsk(p) for p in itertools.permutations(range(1, 6)))}
    assert len(pairs) == 120


# --- Schur --------------------------------------------------------------------

def test_schur_examples():
    a, b = 0.7, -1.3
    assert schur_poly(Partition((1,)), (a, b)) == pytest.approx(a + b)
    assert schur_poly(Partition((1, 1)), (a, b)) == pytest.approx(a * b)
    assert schur_poly(Partition((2,)), (a, b)) == pytest.approx(a * a + a * b + b * b)
    assert schur_poly(Partition((1, 1, 1)), (a, b)) == 0.0
    assert schur_poly(Partition(()), (a, b)) == 1.0


@pytest.mark.parametrize("parts", [(2, 1), (3, 2), (2, 2, 1), (4,), (3, 1, 1)])
def test_schur_matches_ssyt_enumeration(parts):
    xs = (0.3, 1.1, -0.6, 0.9)
    ref = schur_by_ssyt(parts, xs)
    assert schur_poly(Partition(parts), xs) == pytest.approx(ref, rel=1e-12, abs=1e-14)
    assert schur_jacobi_trudi(Partition(parts), xs) == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_schur_routes_agree_near_the_switch():
    xs = (0.5, 0.4, 0.3)
    for lam in enumerate_partitions(12):
        if len(lam) <= 3:
            assert _schur_branching(lam.parts, xs) == pytest.approx(schur_jacobi_trudi(lam, xs), rel=1e-9)


def test_schur_symmetry_random_shuffles():
    rng = random.Random(3)
    lam = Partition((3, 2, 1))
    xs = [0.2, 0.5, 0.9, 0.35]
    ref = schur_poly(lam, xs)
    for _ in range(100):
        rng.shuffle(xs)
        assert schur_poly(lam, xs) == pytest.approx(ref, rel=1e-13)


def test_schur_degree_cap():
    with pytest.raises(ResourceLimitError):
        schur_poly(Partition((200,)), (0.1,))


def test_schur_measure_examples():
    assert schur_measure_weight(Partition(()), (0.5,), (0.5,)) == pytest.approx(0.75)
    a, b = 0.6, 0.7
    for k in range(6):
        assert schur_measure_weight(Partition((k,) if k else ()), (a,), (b,)) == pytest.approx((a * b) ** k * (1 - a * b))
    sums = schur_measure_partial_sums((0.3, 0.2), (0.4,), 30)
    assert abs(sums[-1] - 1) < 1e-8
    assert all(x <= y for x, y in zip(sums, sums[1:]))
    assert sums[-1] <= 1 + 1e-15


def test_schur_measure_domain():
    with pytest.raises(DomainError):
        cauchy_normalization((1.2,), (0.9,))
    with pytest.raises(DomainError):
        schur_measure_weight(Partition((1,)), (-0.1,), (0.2,))
