"""Exact combinatorics: increasing subsequences, partitions, RSK, Plancherel and Schur weights.

All counting is done in Python integers and :class:`fractions.Fraction`, so
results are exact at any size the caller can afford.
"""
from __future__ import annotations

from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import factorial, prod
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError

PARTITION_CAP = 40
SCHUR_DEGREE_CAP = 128
# above this size the tableau sum is replaced by a Jacobi-Trudi determinant
SCHUR_TABLEAU_MAX_SIZE = 12


class ResourceLimitError(DomainError):
    """Requested enumeration exceeds the configured cap."""


@dataclass(frozen=True)
class Permutation:
    """A permutation of {1..N} in one-line notation."""

    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if sorted(vals) != list(range(1, len(vals) + 1)):
            raise ValueError(f"not a permutation of 1..{len(vals)}: {self.values!r}")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        return cls(tuple(int(tok) for tok in text.replace(" ", "").strip("()").split(",") if tok))


@dataclass(frozen=True)
class Partition:
    """Weakly decreasing positive parts.  The empty partition is allowed."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p <= 0 for p in parts):
            raise ValueError(f"partition parts must be positive: {self.parts!r}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"partition parts must be weakly decreasing: {self.parts!r}")
        object.__setattr__(self, "parts", parts)

    @property
    def size(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    @property
    def first_row(self) -> int:
        return self.parts[0] if self.parts else 0

    def conjugate(self) -> "Partition":
        if not self.parts:
            return self
        return Partition(tuple(sum(1 for p in self.parts if p > j) for j in range(self.parts[0])))


# --- increasing subsequences -------------------------------------------------

def lis_length_of(seq: Sequence[float]) -> int:
    """Length of the longest strictly increasing subsequence of any real sequence."""
    tops: list = []
    for v in seq:
        i = bisect_left(tops, v)
        if i == len(tops):
            tops.append(v)
        else:
            tops[i] = v
    return len(tops)


def lis_length(perm: Permutation) -> int:
    """Patience sorting: each value goes on the leftmost pile whose top is >= it."""
    return lis_length_of(perm.values)


def lis_witness(perm: Permutation) -> tuple[int, ...]:
    """One longest increasing subsequence, as 1-based positions into ``perm``."""
    vals = perm.values
    tops: list[int] = []
    top_idx: list[int] = []
    back = [-1] * len(vals)
    for i, v in enumerate(vals):
        k = bisect_left(tops, v)
        back[i] = top_idx[k - 1] if k > 0 else -1
        if k == len(tops):
            tops.append(v)
            top_idx.append(i)
        else:
            tops[k] = v
            top_idx[k] = i
    out = []
    i = top_idx[-1] if top_idx else -1
    while i >= 0:
        out.append(i + 1)
        i = back[i]
    return tuple(reversed(out))


# --- partitions and dimensions -----------------------------------------------

def enumerate_partitions(n: int, cap: int = PARTITION_CAP) -> Iterator[Partition]:
    """All partitions of ``n`` in lexicographically decreasing order."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > cap:
        raise ResourceLimitError(f"partition enumeration of n={n} exceeds cap {cap}")

    def rec(remaining: int, largest: int, prefix: list[int]):
        if remaining == 0:
            yield Partition(tuple(prefix))
            return
        for p in range(min(remaining, largest), 0, -1):
            prefix.append(p)
            yield from rec(remaining - p, p, prefix)
            prefix.pop()

    yield from rec(n, n, [])


def hook_lengths(lam: Partition) -> list[int]:
    conj = lam.conjugate().parts
    return [lam.parts[i] - j + conj[j] - i - 1 for i in range(len(lam)) for j in range(lam.parts[i])]


def dim_partition(lam: Partition) -> int:
    """Number of standard Young tableaux of shape ``lam`` (hook-length formula)."""
    return factorial(lam.size) // prod(hook_lengths(lam))


def plancherel_pmf(n: int, cap: int = PARTITION_CAP) -> dict[int, Fraction]:
    """Exact law of the first row under Plancherel measure dim^2/n! on partitions of n."""
    total = factorial(n)
    acc: dict[int, int] = {}
    for lam in enumerate_partitions(n, cap):
        acc[lam.first_row] = acc.get(lam.first_row, 0) + dim_partition(lam) ** 2
    return {ell: Fraction(w, total) for ell, w in sorted(acc.items())}


def lis_histogram(n: int) -> dict[int, Fraction]:
    """LIS law over all n! permutations by exhaustive enumeration (small n only)."""
    counts = Counter(lis_length_of(p) for p in permutations(range(1, n + 1)))
    total = factorial(n)
    return {ell: Fraction(c, total) for ell, c in sorted(counts.items())}


def pmf_to_json(n: int, pmf: dict[int, Fraction]) -> dict:
    return {"N": n, "pmf": [{"l": ell, "num": str(p.numerator), "den": str(p.denominator)}
                            for ell, p in sorted(pmf.items())]}


# --- RSK ---------------------------------------------------------------------

def rsk(perm: Sequence[int]) -> tuple[list[list[int]], list[list[int]]]:
    """Row-insertion RSK; returns (insertion tableau P, recording tableau Q)."""
    P: list[list[int]] = []
    Q: list[list[int]] = []
    for step, v in enumerate(perm, start=1):
        row = 0
        while True:
            if row == len(P):
                P.append([v])
                Q.append([step])
                break
            r = P[row]
            k = bisect_left(r, v)
            if k == len(r):
                r.append(v)
                Q[row].append(step)
                break
            r[k], v = v, r[k]
            row += 1
    return P, Q


def rsk_shape(perm: Permutation) -> Partition:
    P, _ = rsk(perm.values)
    return Partition(tuple(len(r) for r in P))


# --- Schur polynomials and Schur measure -------------------------------------

def _check_schur_args(lam: Partition, xs: Sequence[float], degree_cap: int) -> tuple[float, ...]:
    xs = tuple(float(x) for x in xs)
    if not xs:
        raise ValueError("need at least one variable")
    if not all(np.isfinite(xs)):
        raise ValueError("variables must be finite")
    if lam.first_row > degree_cap:
        raise ResourceLimitError(f"lambda_1={lam.first_row} exceeds degree cap {degree_cap}")
    return xs


@lru_cache(maxsize=1 << 16)
def _schur_branching(parts: tuple[int, ...], xs: tuple[float, ...]) -> float:
    # s_lam(x_1..x_m) = sum over horizontal strips lam/mu of s_mu(x_1..x_{m-1}) x_m^{|lam/mu|},
    # i.e. the tableau sum grouped by the cells holding the largest letter
    m = len(xs)
    if not parts:
        return 1.0
    if len(parts) > m:
        return 0.0
    if m == 1:
        return xs[0] ** parts[0]
    x = xs[-1]
    rest = xs[:-1]
    size = sum(parts)
    total = 0.0
    # mu interlaces lam: lam_{i+1} <= mu_i <= lam_i
    nxt = parts[1:] + (0,)

    def rec(i: int, mu: list[int]):
        nonlocal total
        if i == len(parts):
            mu_t = tuple(p for p in mu if p > 0)
            total += _schur_branching(mu_t, rest) * x ** (size - sum(mu_t))
            return
        for v in range(nxt[i], parts[i] + 1):
            mu.append(v)
            rec(i + 1, mu)
            mu.pop()

    rec(0, [])
    return total


def complete_homogeneous(k_max: int, xs: Sequence[float]) -> np.ndarray:
    """h_0..h_{k_max} evaluated at ``xs``."""
    h = np.zeros(k_max + 1)
    h[0] = 1.0
    for x in xs:
        for k in range(1, k_max + 1):
            h[k] += x * h[k - 1]
    return h


def schur_jacobi_trudi(lam: Partition, xs: Sequence[float]) -> float:
    """s_lam = det(h_{lam_i - i + j})."""
    ell = len(lam)
    if ell == 0:
        return 1.0
    if ell > len(xs):
        return 0.0
    h = complete_homogeneous(lam.first_row + ell, xs)
    M = np.zeros((ell, ell))
    for i in range(ell):
        for j in range(ell):
            k = lam.parts[i] - i + j
            M[i, j] = h[k] if 0 <= k < len(h) else 0.0
    return float(np.linalg.det(M))


def schur_poly(lam: Partition, xs: Sequence[float], degree_cap: int = SCHUR_DEGREE_CAP) -> float:
    """Evaluate the Schur polynomial s_lam at the real variables ``xs``."""
    xs = _check_schur_args(lam, xs, degree_cap)
    if len(lam) > len(xs):
        return 0.0
    if lam.size <= SCHUR_TABLEAU_MAX_SIZE:
        return _schur_branching(lam.parts, xs)
    return schur_jacobi_trudi(lam, xs)


def cauchy_normalization(a: Sequence[float], b: Sequence[float]) -> float:
    for ai in a:
        for bj in b:
            if ai < 0 or bj < 0 or ai * bj >= 1:
                raise DomainError(f"Schur measure needs a_i, b_j >= 0 and a_i*b_j < 1, got a={a}, b={b}")
    return float(prod(1.0 - ai * bj for ai in a for bj in b))


def schur_measure_weight(lam: Partition, a: Sequence[float], b: Sequence[float]) -> float:
    """Probability of ``lam`` under the Schur measure with specializations a, b."""
    if not a or not b or any(v < 0 for v in (*a, *b)):
        raise DomainError("Schur measure needs nonempty nonnegative a and b")
    norm = cauchy_normalization(a, b)
    return schur_poly(lam, a) * schur_poly(lam, b) * norm


def schur_measure_partial_sums(a: Sequence[float], b: Sequence[float], max_size: int) -> list[float]:
    """Cumulative Schur-measure mass of all partitions with |lam| <= n, for n = 0..max_size."""
    norm = cauchy_normalization(a, b)
    sums = [norm]
    total = norm
    for n in range(1, max_size + 1):
        for lam in enumerate_partitions(n, cap=max(max_size, PARTITION_CAP)):
            if len(lam) > min(len(a), len(b)):
                continue
            total += schur_poly(lam, a) * schur_poly(lam, b) * norm
        sums.append(total)
    return sums
