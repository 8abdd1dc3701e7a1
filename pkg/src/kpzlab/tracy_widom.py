"""GUE Tracy-Widom distribution F2.

Two independent routes:

* :func:`tw_gue_cdf` -- Fredholm determinant det(I - K_Ai) on (s, inf), discretized
  by Gauss-Legendre Nystrom quadrature after the map x = s + L (1+xi)/(1-xi);
* :func:`tw_gue_cdf_painleve` -- F2(s) = exp(-int_s^inf (x-s) q(x)^2 dx) with q
  the Hastings-McLeod solution of q'' = x q + 2 q^3, integrated from the right
  with Airy initial data.
"""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import airy as scipy_airy

from .airy import airy_pair_unchecked
from .errors import ConsistencyError, DomainError


@dataclass(frozen=True)
class QuadratureSpec:
    """m Gauss-Legendre nodes pushed to (s, inf) by x = s + scale (1+xi)/(1-xi)."""

    nodes: int = 64
    scale: float = 10.0

    def __post_init__(self):
        if self.nodes < 4:
            raise ValueError(f"need at least 4 quadrature nodes, got {self.nodes}")
        if not self.scale > 0:
            raise ValueError(f"mapping scale must be > 0, got {self.scale}")

    def points(self, s: float) -> tuple[np.ndarray, np.ndarray]:
        xi, w = _legendre(self.nodes)
        x = s + self.scale * (1 + xi) / (1 - xi)
        return x, w * 2 * self.scale / (1 - xi) ** 2


@lru_cache(maxsize=32)
def _legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(m)


def airy_kernel(x: np.ndarray, ai: np.ndarray | None = None, aip: np.ndarray | None = None) -> np.ndarray:
    """K(x_i, x_j) = (Ai(x_i)Ai'(x_j) - Ai'(x_i)Ai(x_j)) / (x_i - x_j), diagonal Ai'(x)^2 - x Ai(x)^2."""
    if ai is None:
        ai, aip = airy_pair_unchecked(x)
    diff = np.subtract.outer(x, x)
    num = np.outer(ai, aip) - np.outer(aip, ai)
    close = diff == 0
    K = num / np.where(close, 1.0, diff)
    idx = np.arange(len(x))
    K[idx, idx] = aip * aip - x * ai * ai
    return K


def fredholm_determinants(s_values, quad: QuadratureSpec | None = None) -> np.ndarray:
    """Unclamped det(I - K_Ai) on (s, inf) for each s; Airy values computed in one batch."""
    quad = quad or QuadratureSpec()
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    xi, w = _legendre(quad.nodes)
    X = s_values[:, None] + quad.scale * (1 + xi) / (1 - xi)
    rw = np.sqrt(w * 2 * quad.scale / (1 - xi) ** 2)
    AI, AIP = airy_pair_unchecked(X.ravel())
    AI, AIP = AI.reshape(X.shape), AIP.reshape(X.shape)
    eye = np.eye(quad.nodes)
    out = np.empty(len(s_values))
    for k in range(len(s_values)):
        A = eye - rw[:, None] * airy_kernel(X[k], AI[k], AIP[k]) * rw[None, :]
        # LAPACK getrf (partial pivoting) underneath
        sign, logdet = np.linalg.slogdet(A)
        out[k] = sign * np.exp(logdet)
    return out


def tw_gue_cdf(s: float, quad: QuadratureSpec | None = None) -> float:
    """F2(s) by the Airy-kernel Fredholm determinant."""
    quad = quad or QuadratureSpec()
    if not np.isfinite(s):
        raise DomainError(f"s must be finite, got {s}")
    val = float(fredholm_determinants([float(s)], quad)[0])
    if not 0.0 <= val <= 1.0:
        warnings.warn(f"F2({s}) = {val!r} outside [0,1] (quadrature underflow); clamped",
                      RuntimeWarning, stacklevel=2)
        val = min(max(val, 0.0), 1.0)
    return val


# --- Painleve II route ---------------------------------------------------------

PAINLEVE_START = 8.0


def _painleve_rhs(x, u):
    q, qp, I, J = u
    # I(x) = int_x^inf (t-x) q^2 dt, J(x) = int_x^inf q^2 dt  =>  I' = -J, J' = -q^2
    return [qp, x * q + 2 * q ** 3, -J, -q * q]


@lru_cache(maxsize=8)
def _painleve_solution(s_min: float, x0: float = PAINLEVE_START, rtol: float = 1e-13):
    ai, aip, _, _ = scipy_airy(x0)
    # tails from q ~ Ai at x0: int_x0^inf Ai^2 = Ai'^2 - x0 Ai^2,
    # int_x0^inf (t-x0) Ai^2 = (2 x0^2 Ai^2 - 2 x0 Ai'^2 - Ai Ai') / 3
    J0 = aip ** 2 - x0 * ai ** 2
    I0 = (2 * x0 ** 2 * ai ** 2 - 2 * x0 * aip ** 2 - ai * aip) / 3
    return solve_ivp(_painleve_rhs, (x0, s_min), [ai, aip, I0, J0], method="DOP853",
                     rtol=rtol, atol=1e-300, dense_output=True)


def tw_gue_cdf_painleve(s, s_min: float = -10.0):
    """F2(s) through the Hastings-McLeod Painleve II transcendent (oracle route)."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < s_min):
        raise DomainError(f"Painleve route integrated only down to {s_min}")
    out = np.empty_like(s_arr)
    right = s_arr >= PAINLEVE_START
    if right.any():
        ai, aip, _, _ = scipy_airy(s_arr[right])
        x0 = s_arr[right]
        out[right] = np.exp(-(2 * x0 ** 2 * ai ** 2 - 2 * x0 * aip ** 2 - ai * aip) / 3)
    if (~right).any():
        sol = _painleve_solution(float(s_min))
        out[~right] = np.exp(-sol.sol(s_arr[~right])[2])
    return float(out[0]) if np.ndim(s) == 0 else out


# --- tables ---------------------------------------------------------------------

@dataclass(frozen=True)
class TwTable:
    s: np.ndarray
    cdf: np.ndarray
    density: np.ndarray
    mean: float
    variance: float
    quantiles: dict = field(default_factory=dict)
    clamped: bool = False

    def cdf_at(self, x):
        """Piecewise-linear interpolation of the tabulated F2; 0 and 1 outside."""
        return np.interp(x, self.s, self.cdf, left=0.0, right=1.0)

    def quantile(self, p: float) -> float:
        if not 0 < p < 1:
            raise ValueError("quantile level must be in (0,1)")
        i = int(np.searchsorted(self.cdf, p))
        if i == 0 or i >= len(self.s):
            raise ValueError(f"quantile {p} outside tabulated range")
        lo, hi = self.s[i - 1], self.s[i]
        flo, fhi = self.cdf[i - 1], self.cdf[i]
        return float(lo + (p - flo) * (hi - lo) / (fhi - flo))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "F2", "density"])
        for row in zip(self.s, self.cdf, self.density):
            w.writerow([f"{v:.17g}" for v in row])
        return buf.getvalue()

    def summary(self) -> dict:
        return {"mean": self.mean, "variance": self.variance,
                "quantiles": {str(k): v for k, v in self.quantiles.items()},
                "s_min": float(self.s[0]), "s_max": float(self.s[-1]), "points": len(self.s)}


def tw_table(s_min: float = -10.0, s_max: float = 6.0, step: float = 0.01,
             quad: QuadratureSpec | None = None,
             levels: tuple[float, ...] = (0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99)) -> TwTable:
    """Tabulate F2 and its density on a grid; moments and quantiles from the table."""
    if not s_min < s_max:
        raise ValueError("need s_min < s_max")
    if not step > 0:
        raise ValueError("step must be > 0")
    quad = quad or QuadratureSpec()
    n = int(round((s_max - s_min) / step))
    s = s_min + step * np.arange(n + 1)
    # two extra nodes on each side for the five-point central difference
    ext = s_min + step * np.arange(-2, n + 3)
    raw = fredholm_determinants(ext, quad)
    clamped = bool(np.any((raw < 0) | (raw > 1)))
    vals = np.clip(raw, 0.0, 1.0)
    if np.any(np.diff(vals) < 0):
        bad = ext[1:][np.diff(vals) < 0][0]
        raise ConsistencyError(f"tabulated F2 decreases near s={bad:.6g}; increase quadrature nodes")
    density = (vals[:-4] - 8 * vals[1:-3] + 8 * vals[3:-1] - vals[4:]) / (12 * step)
    cdf = vals[2:-2]
    mass = np.trapezoid(density, s)
    mean = float(np.trapezoid(s * density, s) / mass)
    var = float(np.trapezoid((s - mean) ** 2 * density, s) / mass)
    table = TwTable(s, cdf, density, mean, var, clamped=clamped)
    qs = {}
    for p in levels:
        try:
            qs[p] = table.quantile(p)
        except ValueError:
            pass
    return TwTable(s, cdf, density, mean, var, qs, clamped)
