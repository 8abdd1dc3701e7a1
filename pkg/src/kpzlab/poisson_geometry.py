"""Poissonized point clouds and their longest up-right chains."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .combinatorics import Permutation, lis_length_of
from .errors import DomainError, OutOfRangeError
from .rng import RngSpec, as_generator

Region = Literal["square", "cone"]


@dataclass(frozen=True)
class PointCloud:
    """Planar points tagged with their region.

    For ``region="square"`` columns are ``(x, y)`` in (0,1)^2 and ``intensity``
    is the Poisson rate.  For ``region="cone"`` columns are ``(s, y)`` =
    (time, space) with ``|y| < s < horizon`` and unit intensity.
    """

    points: np.ndarray
    region: Region = "square"
    intensity: float = 1.0
    horizon: float | None = None
    _validated: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.region not in ("square", "cone"):
            raise ValueError(f"unknown region {self.region!r}")
        if self.region == "cone" and self.horizon is None:
            raise ValueError("cone clouds need a horizon")
        if not self._validated:
            self.validate()

    def __len__(self) -> int:
        return len(self.points)

    def validate(self) -> None:
        pts = self.points
        if len(pts) == 0:
            return
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        if self.region == "square":
            if np.any(pts <= 0) or np.any(pts >= 1):
                raise ValueError("square cloud points must lie strictly inside (0,1)^2")
        else:
            s, y = pts[:, 0], pts[:, 1]
            if np.any(np.abs(y) >= s) or np.any(s >= self.horizon):
                raise ValueError("cone cloud points must satisfy |y| < s < horizon")
        for col in range(2):
            if len(np.unique(pts[:, col])) != len(pts):
                raise ValueError("coordinate tie in point cloud")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "y"] if self.region == "cone" else ["x", "y"])
        for a, b in self.points:
            w.writerow([f"{a:.17g}", f"{b:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, intensity: float = 1.0, horizon: float | None = None) -> "PointCloud":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        region: Region = "cone" if header[0] == "s" else "square"
        pts = np.array([[float(a), float(b)] for a, b in body]).reshape(-1, 2)
        return cls(pts, region=region, intensity=intensity, horizon=horizon)


def _check_mean(mean: float) -> None:
    if not (isinstance(mean, (int, float, np.floating)) and math.isfinite(mean) and mean >= 0):
        raise DomainError(f"Poisson mean must be finite and >= 0, got {mean!r}")


def sample_poisson_count(mean: float, rng: RngSpec | np.random.Generator, size=None):
    """Draw from Poisson(mean); ``size`` gives an array of draws."""
    _check_mean(mean)
    g = as_generator(rng)
    out = g.poisson(float(mean), size=size)
    return int(out) if size is None else out


def _redraw_ties(pts: np.ndarray, draw) -> np.ndarray:
    # exact coordinate collisions are redrawn point by point
    while True:
        bad = np.zeros(len(pts), dtype=bool)
        for col in range(pts.shape[1]):
            vals = pts[:, col]
            uniq, counts = np.unique(vals, return_counts=True)
            for v in uniq[counts > 1]:
                bad[np.flatnonzero(vals == v)[1:]] = True
        if not bad.any():
            return pts
        pts[bad] = draw(int(bad.sum()))


def sample_unit_square(intensity: float, rng: RngSpec | np.random.Generator) -> PointCloud:
    """Poisson point process of the given intensity on the open unit square."""
    if not intensity > 0:
        raise ValueError(f"intensity must be > 0, got {intensity}")
    g = as_generator(rng)
    n = sample_poisson_count(intensity, g)

    def draw(k):
        p = g.random((k, 2))
        # Generator.random is on [0,1); 0 itself is a legal but excluded draw
        while np.any(p == 0.0):
            z = np.any(p == 0.0, axis=1)
            p[z] = g.random((int(z.sum()), 2))
        return p

    pts = _redraw_ties(draw(n), draw)
    return PointCloud(pts, region="square", intensity=float(intensity), _validated=True)


def sample_cone(horizon: float, rng: RngSpec | np.random.Generator) -> PointCloud:
    """Unit-intensity Poisson points in the droplet cone {|y| < s < horizon}."""
    if not horizon > 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    g = as_generator(rng)
    n = sample_poisson_count(horizon * horizon, g)

    def draw(k):
        out = np.empty((0, 2))
        while len(out) < k:
            box = np.column_stack([g.random(2 * k) * horizon, (2 * g.random(2 * k) - 1) * horizon])
            keep = (np.abs(box[:, 1]) < box[:, 0]) & (box[:, 0] > 0)
            out = np.vstack([out, box[keep]])
        return out[:k]

    pts = _redraw_ties(draw(n), draw)
    return PointCloud(pts, region="cone", intensity=1.0, horizon=float(horizon), _validated=True)


def points_to_permutation(cloud: PointCloud) -> Permutation:
    """Read the permutation from x order to y order."""
    if cloud.region != "square":
        raise ValueError("points_to_permutation needs a unit-square cloud")
    if len(cloud) == 0:
        raise ValueError("empty point cloud has no permutation")
    pts = cloud.points
    by_x = np.argsort(pts[:, 0], kind="stable")
    y_rank = np.empty(len(pts), dtype=int)
    y_rank[np.argsort(pts[:, 1], kind="stable")] = np.arange(1, len(pts) + 1)
    return Permutation(tuple(int(r) for r in y_rank[by_x]))


def chain_length_uv(u: np.ndarray, v: np.ndarray) -> int:
    """Longest chain strictly increasing in both coordinates."""
    if len(u) == 0:
        return 0
    order = np.argsort(u, kind="stable")
    return lis_length_of(v[order].tolist())


def longest_chain(cloud: PointCloud) -> int:
    if cloud.region != "square":
        raise ValueError("longest_chain needs a unit-square cloud")
    return chain_length_uv(cloud.points[:, 0], cloud.points[:, 1])


def light_cone_coords(cloud: PointCloud) -> tuple[np.ndarray, np.ndarray]:
    s, y = cloud.points[:, 0], cloud.points[:, 1]
    return s + y, s - y


def cone_last_passage(cloud: PointCloud, t: float, x: float) -> int:
    """Longest light-cone-directed chain of nucleations ending below (t, x)."""
    if cloud.region != "cone":
        raise ValueError("cone_last_passage needs a cone cloud")
    if abs(x) >= t:
        return 0
    if t > cloud.horizon:
        raise OutOfRangeError(f"t={t} beyond cloud horizon {cloud.horizon}")
    u, v = light_cone_coords(cloud)
    # (s, y) lies in the backward light cone of (t, x) iff |x - y| < t - s
    keep = (u < t + x) & (v < t - x)
    return chain_length_uv(u[keep], v[keep])
