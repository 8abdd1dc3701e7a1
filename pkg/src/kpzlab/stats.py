"""Empirical distributions, Kolmogorov-Smirnov distance and power-law fits."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .combinatorics import lis_length_of
from .errors import DomainError
from .poisson_geometry import longest_chain, sample_poisson_count, sample_unit_square
from .rng import RngSpec


@dataclass(frozen=True)
class EmpiricalSample:
    draws: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(self.draws, dtype=float).ravel()
        if not np.all(np.isfinite(d)):
            raise ValueError("sample draws must be finite")
        d.setflags(write=False)
        object.__setattr__(self, "draws", d)
        n = self.meta.get("n")
        if n is not None and n != len(d):
            raise ValueError(f"declared sample count {n} != {len(d)} draws")

    def __len__(self) -> int:
        return len(self.draws)

    def to_csv(self, column: str = "value") -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([column])
        for v in self.draws:
            w.writerow([f"{v:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, column: str | None = None, meta: dict | None = None) -> "EmpiricalSample":
        reader = csv.DictReader(io.StringIO(text))
        col = column or reader.fieldnames[-1]
        return cls(np.array([float(r[col]) for r in reader]), dict(meta or {}))


def center_scale_lis(lengths: Sequence[int], intensity: float, meta: dict | None = None) -> EmpiricalSample:
    """(L - 2 sqrt(N)) / N^(1/6)."""
    if not intensity > 0:
        raise DomainError(f"intensity must be > 0, got {intensity}")
    L = np.asarray(lengths, dtype=float)
    m = {"model": "lis", "intensity": intensity, "n": len(L)}
    m.update(meta or {})
    return EmpiricalSample((L - 2 * math.sqrt(intensity)) / intensity ** (1 / 6), m)


def lis_trial(intensity: float, rng: RngSpec, poissonized: bool = True) -> int:
    """One LIS draw: Poisson points of the given intensity, or a uniform permutation of fixed size."""
    if poissonized:
        return longest_chain(sample_unit_square(intensity, rng))
    n = int(intensity)
    if n != intensity or n < 1:
        raise DomainError(f"fixed-size LIS needs a positive integer size, got {intensity}")
    return lis_length_of(rng.generator().permutation(n).tolist())


def lis_monte_carlo(intensity: float, samples: int, rng: RngSpec, poissonized: bool = True) -> np.ndarray:
    """LIS lengths of ``samples`` independent trials, trial i on ``rng.substream(i)``."""
    if samples < 0:
        raise DomainError("sample count must be >= 0")
    if not intensity > 0:
        raise DomainError(f"intensity must be > 0, got {intensity}")
    return np.array([lis_trial(intensity, rng.substream(i), poissonized)
                     for i in range(samples)], dtype=np.int64)


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous ECDF: value k/n from the k-th order statistic on."""

    xs: np.ndarray

    def __call__(self, x):
        return np.searchsorted(self.xs, x, side="right") / len(self.xs)


def empirical_cdf(sample: EmpiricalSample) -> StepFunction:
    if len(sample) == 0:
        raise ValueError("empirical CDF of an empty sample")
    return StepFunction(np.sort(sample.draws))


def ks_statistic(sample: EmpiricalSample, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """sup_x |F_n(x) - F(x)|, checking both sides of every jump of F_n.

    Just below a draw the ECDF is compared with the left limit of ``cdf``; for a
    continuous reference this is the usual D = max(D+, D-).
    """
    if len(sample) == 0:
        raise ValueError("KS statistic of an empty sample")
    x = np.sort(sample.draws)
    n = len(x)
    F = np.asarray(cdf(x), dtype=float)
    F_left = np.asarray(cdf(np.nextafter(x, -np.inf)), dtype=float)
    if (np.any(np.diff(F) < -1e-12) or np.any(F_left > F + 1e-12)
            or np.any(F < -1e-12) or np.any(F > 1 + 1e-12)):
        raise DomainError("reference CDF is not monotone with values in [0,1]")
    # for tied draws take the ECDF value after the last copy
    upper = np.searchsorted(x, x, side="right") / n
    lower = np.searchsorted(x, x, side="left") / n
    return float(max(np.max(np.abs(upper - F)), np.max(np.abs(F_left - lower))))


def fit_exponent(pairs: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares slope of log v on log t and its standard error."""
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 3:
        raise DomainError("need at least three (t, v) pairs")
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise DomainError("fit_exponent needs positive finite t and v")
    X, Y = np.log(arr[:, 0]), np.log(arr[:, 1])
    xm = X - X.mean()
    sxx = float(xm @ xm)
    if sxx == 0:
        raise DomainError("all scales t are equal")
    slope = float(xm @ (Y - Y.mean())) / sxx
    resid = Y - Y.mean() - slope * xm
    dof = len(X) - 2
    stderr = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else float("nan")
    return slope, stderr


def summary(sample: EmpiricalSample, cdf=None, exponent: tuple[float, float] | None = None) -> dict:
    d = sample.draws
    out = {"mean": float(d.mean()), "var": float(d.var(ddof=1)) if len(d) > 1 else 0.0,
           "ks": ks_statistic(sample, cdf) if cdf is not None else None,
           "exponent": exponent[0] if exponent else None,
           "stderr": exponent[1] if exponent else None,
           "n": len(d)}
    return out
