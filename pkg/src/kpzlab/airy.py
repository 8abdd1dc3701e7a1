"""Airy function Ai and its derivative in double precision.

Regimes, all vectorized over numpy arrays:

* ``x <= -NEG_SWITCH``: oscillatory asymptotic expansion;
* ``MACLAURIN_MIN < x <= MACLAURIN_MAX``: Maclaurin series;
* ``x >= POS_SWITCH``: exponential asymptotic expansion;
* everything in between: local Taylor steps of ``y'' = x y`` integrated
  downward from ``POS_SWITCH``.  The decaying solution is stable in that
  direction, while the Maclaurin series for large positive x cancels two
  exponentially large parts.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

AIRY_DOMAIN = 200.0
NEG_SWITCH = 8.0
MACLAURIN_MIN = -4.5
MACLAURIN_MAX = 2.0
POS_SWITCH = 8.0
_STEPS = 40
_TAYLOR_TERMS = 24

AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)


def _asymptotic_coeffs(n: int) -> tuple[np.ndarray, np.ndarray]:
    u = np.empty(n)
    u[0] = 1.0
    for k in range(1, n):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
    k = np.arange(n)
    v = -(6 * k + 1) / (6 * k - 1) * u
    return u, v


_U, _V = _asymptotic_coeffs(40)


def _truncated_series(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """sum_k coeffs[k] z^-k, stopped at the smallest term (optimal truncation)."""
    total = np.zeros_like(z)
    term = np.ones_like(z)
    prev = np.full_like(z, np.inf)
    active = np.ones(z.shape, dtype=bool)
    for k in range(len(coeffs)):
        t = coeffs[k] * term
        grow = np.abs(t) > prev
        active &= ~grow
        total = np.where(active, total + t, total)
        prev = np.abs(t)
        term = term / z
    return total


def _maclaurin_pair(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Ai = Ai(0) f + Ai'(0) g with f = sum a_k x^{3k}, g = sum b_k x^{3k+1};
    # derivatives summed termwise from the same coefficients
    x3 = x ** 3
    a = np.ones_like(x)
    b = np.ones_like(x)
    f = np.ones_like(x)
    g = x.copy()
    fp = np.zeros_like(x)
    gp = np.ones_like(x)
    xk = np.ones_like(x)      # x^{3k}
    for k in range(1, 80):
        a = a / ((3 * k - 1) * (3 * k))
        b = b / ((3 * k) * (3 * k + 1))
        xkm1 = xk * x * x      # x^{3k-1}
        xk = xk * x3
        f_t = a * xk
        g_t = b * xk * x
        f += f_t
        g += g_t
        fp += 3 * k * a * xkm1
        gp += (3 * k + 1) * b * xk
        if np.all(np.abs(f_t) + np.abs(g_t) <= 1e-18 * (np.abs(f) + np.abs(g))):
            break
    return AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp


def _positive_asymptotic(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    zeta = 2.0 / 3.0 * x ** 1.5
    pref = np.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    alt = (-1.0) ** np.arange(len(_U))
    su = _truncated_series(_U * alt, zeta)
    sv = _truncated_series(_V * alt, zeta)
    q = x ** 0.25
    return pref / q * su, -pref * q * sv


def _negative_asymptotic(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z = -x
    zeta = 2.0 / 3.0 * z ** 1.5
    n = len(_U) // 2
    k = np.arange(n)
    sign = (-1.0) ** k
    # even / odd parts in powers of zeta^-1, each as a series in zeta^-2
    ue = _truncated_series(_U[0::2][:n] * sign, zeta ** 2)
    uo = _truncated_series(_U[1::2][:n] * sign, zeta ** 2) / zeta
    ve = _truncated_series(_V[0::2][:n] * sign, zeta ** 2)
    vo = _truncated_series(_V[1::2][:n] * sign, zeta ** 2) / zeta
    ph = zeta - math.pi / 4
    c, s = np.cos(ph), np.sin(ph)
    q = z ** 0.25
    ai = (c * ue + s * uo) / (math.sqrt(math.pi) * q)
    aip = q * (s * ve - c * vo) / math.sqrt(math.pi)
    return ai, aip


def _taylor_step(c: np.ndarray, y: np.ndarray, yp: np.ndarray, h: np.ndarray):
    """Advance y'' = x y from x=c by h using the local Taylor recurrence."""
    a_prev2 = y                 # a_{n-2}
    a_prev1 = yp                # a_{n-1}
    a_pm3 = np.zeros_like(y)    # a_{n-3}
    val = y + yp * h
    der = yp.copy()
    hp = h.copy()               # h^{n-1}
    for n in range(2, _TAYLOR_TERMS):
        # n(n-1) a_n = c a_{n-2} + a_{n-3}
        a_n = (c * a_prev2 + a_pm3) / (n * (n - 1))
        der = der + n * a_n * hp
        hp = hp * h
        val = val + a_n * hp
        a_pm3, a_prev2, a_prev1 = a_prev2, a_prev1, a_n
    return val, der


def _stepped(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    start = np.full_like(x, POS_SWITCH)
    y, yp = _positive_asymptotic(start)
    h = (x - POS_SWITCH) / _STEPS
    c = start
    for _ in range(_STEPS):
        y, yp = _taylor_step(c, y, yp, h)
        c = c + h
    return y, yp


def airy_pair_unchecked(x) -> tuple[np.ndarray, np.ndarray]:
    """(Ai(x), Ai'(x)) without the domain check; far right tail underflows to 0."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    ai = np.empty_like(x)
    aip = np.empty_like(x)
    regions = [
        (x <= -NEG_SWITCH, _negative_asymptotic),
        ((x > MACLAURIN_MIN) & (x <= MACLAURIN_MAX), _maclaurin_pair),
        (((x > -NEG_SWITCH) & (x <= MACLAURIN_MIN)) | ((x > MACLAURIN_MAX) & (x < POS_SWITCH)), _stepped),
        (x >= POS_SWITCH, _positive_asymptotic),
    ]
    for mask, fn in regions:
        if mask.any():
            with np.errstate(under="ignore", over="ignore"):
                a, b = fn(x[mask])
            ai[mask], aip[mask] = a, b
    if scalar:
        return float(ai[0]), float(aip[0])
    return ai, aip


def airy_pair(x):
    """Ai(x) and Ai'(x) for |x| <= 200, scalar or array."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(np.abs(arr) > AIRY_DOMAIN):
        raise DomainError(f"Airy evaluation needs finite |x| <= {AIRY_DOMAIN}")
    return airy_pair_unchecked(arr)
