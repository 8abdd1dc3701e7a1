"""Stochastic heat equation dz = (1/2) z'' dt + z dW on a periodic grid, and its Hopf-Cole height.

The scheme is explicit Euler-Maruyama in the Ito sense:

    z_i <- z_i + dt/2 * (z_{i+1} - 2 z_i + z_{i-1}) / dx^2 + z_i * sqrt(dt/dx) * g_i

with g_i i.i.d. standard normal per site and step, which gives the lattice
noise covariance delta_ij/dx per unit time.  The KPZ height is only ever
defined as log z.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .rng import RngSpec, as_generator


@dataclass(frozen=True)
class LatticeField:
    values: np.ndarray
    dx: float
    time: float = 0.0
    periodic: bool = True
    # True once any site of an SHE trajectory has reached z <= 0
    lost_positivity: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or len(v) < 3:
            raise ValueError("a lattice field needs at least three sites")
        if not np.all(np.isfinite(v)):
            raise ValueError("lattice values must be finite")
        if not self.dx > 0:
            raise ValueError(f"dx must be > 0, got {self.dx}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def sites(self) -> int:
        return len(self.values)

    @property
    def x(self) -> np.ndarray:
        return self.dx * np.arange(self.sites)

    @property
    def period(self) -> float:
        return self.dx * self.sites

    @classmethod
    def from_function(cls, f, sites: int, dx: float) -> "LatticeField":
        return cls(f(dx * np.arange(sites)), dx)


@dataclass(frozen=True)
class SheRun:
    """Snapshots of one SHE trajectory; ``lost_positivity`` if any site reached z <= 0."""

    snapshots: tuple[LatticeField, ...]
    config: dict = field(default_factory=dict)

    @property
    def final(self) -> LatticeField:
        return self.snapshots[-1]

    @property
    def lost_positivity(self) -> bool:
        return self.final.lost_positivity

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "z", "h"])
        for snap in self.snapshots:
            z = snap.values
            with np.errstate(divide="ignore", invalid="ignore"):
                h = np.where(z > 0, np.log(np.where(z > 0, z, 1.0)), np.nan)
            for xi, zi, hi in zip(snap.x, z, h):
                w.writerow([f"{snap.time:.17g}", f"{xi:.17g}", f"{zi:.17g}", f"{hi:.17g}"])
        return buf.getvalue()


def _check_stability(dx: float, dt: float) -> None:
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    if dt > dx * dx / 2 * (1 + 1e-12):
        raise DomainError(f"explicit scheme unstable: dt={dt} > dx^2/2={dx * dx / 2}")


def _step_sizes(T: float, t0: float, dt: float) -> list[float]:
    """Steps of size dt, the last one shortened to land on T."""
    if T < t0:
        raise DomainError(f"target time {T} precedes field time {t0}")
    n = int(np.floor((T - t0) / dt + 1e-9))
    steps = [dt] * n
    rem = (T - t0) - n * dt
    if rem > 1e-12 * max(1.0, T):
        steps.append(rem)
    return steps


def _laplacian(z: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(z, -1, axis=-1) - 2 * z + np.roll(z, 1, axis=-1)) / (dx * dx)


def em_step(z: np.ndarray, dt: float, dx: float, g: np.ndarray | None) -> np.ndarray:
    """One EM step; ``z`` may carry leading batch axes, ``g=None`` switches the noise off."""
    out = z + 0.5 * dt * _laplacian(z, dx)
    if g is not None:
        out = out + z * np.sqrt(dt / dx) * g
    return out


def simulate_she(z0: LatticeField, T: float, dt: float, rng: RngSpec | np.random.Generator | None,
                 snapshot_every: int | None = None, noise: bool = True) -> SheRun:
    """Evolve ``z0`` to time ``T``; snapshots every ``snapshot_every`` steps plus the endpoints."""
    if not z0.periodic:
        raise ValueError("only periodic fields are supported")
    _check_stability(z0.dx, dt)
    steps = _step_sizes(T, z0.time, dt)
    n = len(steps)
    g = as_generator(rng) if noise else None
    z = z0.values.copy()
    lost = z0.lost_positivity or bool(np.any(z <= 0))
    snaps = [z0]
    for k, h in enumerate(steps, start=1):
        z = em_step(z, h, z0.dx, g.standard_normal(z.shape) if noise else None)
        t = T if k == n else z0.time + k * dt
        if not np.all(np.isfinite(z)):
            raise FloatingPointError(f"SHE solution blew up at step {k} (t={t})")
        lost = lost or bool(np.any(z <= 0))
        if k == n or (snapshot_every and k % snapshot_every == 0):
            snaps.append(LatticeField(z, z0.dx, t, True, lost))
    if n == 0:
        snaps.append(z0)
    cfg = {"M": z0.sites, "dx": z0.dx, "dt": dt, "T": T, "noise": noise}
    if isinstance(rng, RngSpec):
        cfg.update(seed=rng.seed, stream=rng.stream)
    return SheRun(tuple(snaps), cfg)


def she_ensemble(z0: LatticeField, T: float, dt: float, samples: int, rng: RngSpec,
                 chunk: int = 500) -> tuple[np.ndarray, np.ndarray]:
    """Final fields of ``samples`` independent runs, sample i driven by ``rng.substream(i)``.

    Returns (z_final with shape (samples, M), lost_positivity flags).  The
    per-sample noise is the same as :func:`simulate_she` would draw, so results
    do not depend on ``chunk``.
    """
    _check_stability(z0.dx, dt)
    steps = _step_sizes(T, z0.time, dt)
    n = len(steps)
    M = z0.sites
    finals = np.empty((samples, M))
    lost = np.zeros(samples, dtype=bool)
    for lo in range(0, samples, chunk):
        hi = min(samples, lo + chunk)
        gens = [rng.substream(i).generator() for i in range(lo, hi)]
        noise = np.stack([g_.standard_normal((n, M)) for g_ in gens], axis=1)
        z = np.broadcast_to(z0.values, (hi - lo, M)).copy()
        bad = np.any(z <= 0, axis=1)
        for k, h in enumerate(steps):
            z = em_step(z, h, z0.dx, noise[k])
            bad |= np.any(z <= 0, axis=1)
        if not np.all(np.isfinite(z)):
            raise FloatingPointError("SHE ensemble produced non-finite values")
        finals[lo:hi] = z
        lost[lo:hi] = bad
    return finals, lost


def hopf_cole_height(z: LatticeField) -> LatticeField:
    """h = log z pointwise."""
    bad = np.flatnonzero(z.values <= 0)
    if len(bad):
        raise DomainError(f"Hopf-Cole needs z > 0; site {bad[0]} has z = {z.values[bad[0]]}")
    return LatticeField(np.log(z.values), z.dx, z.time, z.periodic)


def heat_semigroup_reference(z0: LatticeField, T: float, symbol: str = "continuum") -> LatticeField:
    """Exact solution of dz/dt = z''/2 on the periodic grid by discrete Fourier diagonalization.

    ``symbol="continuum"`` damps mode k by exp(-k^2 T/2), the exact flow of the
    trigonometric interpolant of z0; ``symbol="lattice"`` uses the eigenvalues
    of the three-point Laplacian, the exact flow of the semi-discrete system.
    """
    if not z0.periodic:
        raise ValueError("heat_semigroup_reference needs a periodic grid")
    M, dx = z0.sites, z0.dx
    k = 2 * np.pi * np.fft.fftfreq(M, d=dx)
    if symbol == "continuum":
        lam = k ** 2
    elif symbol == "lattice":
        lam = (2 - 2 * np.cos(k * dx)) / dx ** 2
    else:
        raise ValueError(f"unknown symbol {symbol!r}")
    zhat = np.fft.fft(z0.values) * np.exp(-0.5 * lam * (T - z0.time))
    return LatticeField(np.fft.ifft(zhat).real, dx, T, True)
