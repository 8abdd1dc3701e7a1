"""Polynuclear growth with droplet initial data.

Each nucleation at (s, y) lifts the interface by one: it creates an up-step that
travels left and a down-step that travels right, both at speed one.  A
right-moving down-step meeting a left-moving up-step annihilates with it.  The
event-driven simulation below is exact; :func:`kpzlab.poisson_geometry.cone_last_passage`
gives the same heights through the longest-chain representation.
"""
from __future__ import annotations

import csv
import heapq
import io
import itertools
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import OutOfRangeError
from .poisson_geometry import PointCloud, chain_length_uv
from .rng import RngSpec, as_generator

UP, DOWN = "up", "down"


@dataclass(frozen=True)
class Step:
    """An interface step born at (birth_time, origin); its position is never accumulated."""

    id: int
    kind: str
    origin: float
    birth_time: float

    @property
    def velocity(self) -> int:
        return -1 if self.kind == UP else 1

    def position(self, t: float) -> float:
        return self.origin + self.velocity * (t - self.birth_time)


@dataclass(frozen=True)
class PngState:
    time: float
    steps: tuple[Step, ...] = ()
    base_height: int = 0

    def height(self, x: float) -> int:
        h = self.base_height
        for st in self.steps:
            if st.position(self.time) >= x:
                break
            h += 1 if st.kind == UP else -1
        return h

    def profile(self) -> list[tuple[float, int]]:
        """(position, height just right of it) for every step, left to right."""
        out, h = [], self.base_height
        for st in self.steps:
            h += 1 if st.kind == UP else -1
            out.append((st.position(self.time), h))
        return out


def _collision(down: Step, up: Step) -> tuple[float, float]:
    # origin_d + (t - b_d) = origin_u - (t - b_u)
    t = 0.5 * (up.origin - down.origin + down.birth_time + up.birth_time)
    return t, down.position(t)


class _Engine:
    """Mutable event loop; the public objects wrap immutable snapshots of it."""

    def __init__(self, state: PngState, id_source: Iterable[int]):
        self.time = state.time
        self.steps: list[Step] = list(state.steps)
        self.ids = id_source
        self.heap: list = []
        self.nucleations = 0
        self.collisions = 0
        for a, b in zip(self.steps, self.steps[1:]):
            self._push_pair(a, b)

    def _push_pair(self, a: Step, b: Step) -> None:
        if a.kind == DOWN and b.kind == UP:
            t, x = _collision(a, b)
            heapq.heappush(self.heap, (t, x, a.id, b.id))

    def _next_collision(self):
        while self.heap:
            t, x, da, ub = self.heap[0]
            i = self._find(da)
            if i is not None and i + 1 < len(self.steps) and self.steps[i + 1].id == ub:
                return self.heap[0], i
            heapq.heappop(self.heap)
        return None, None

    def _find(self, step_id: int) -> int | None:
        for i, st in enumerate(self.steps):
            if st.id == step_id:
                return i
        return None

    def nucleate(self, s: float, y: float) -> None:
        t = s
        i = bisect_left(self.steps, y, key=lambda st: st.position(t))
        up = Step(next(self.ids), UP, y, s)
        down = Step(next(self.ids), DOWN, y, s)
        self.steps[i:i] = [up, down]
        if i > 0:
            self._push_pair(self.steps[i - 1], up)
        if i + 2 < len(self.steps):
            self._push_pair(down, self.steps[i + 2])
        self.nucleations += 1

    def annihilate(self, i: int) -> None:
        del self.steps[i:i + 2]
        if 0 < i < len(self.steps):
            self._push_pair(self.steps[i - 1], self.steps[i])
        self.collisions += 1

    def run(self, nucleations: np.ndarray, until: float) -> None:
        """Apply every event strictly before ``until``; nucleations sorted by time."""
        k = 0
        n = len(nucleations)
        while True:
            ev, i = self._next_collision()
            t_col = (ev[0], ev[1]) if ev is not None else (np.inf, np.inf)
            t_nuc = (nucleations[k, 0], nucleations[k, 1]) if k < n else (np.inf, np.inf)
            # ties broken by (time, position)
            if min(t_col, t_nuc)[0] >= until:
                break
            if t_nuc <= t_col:
                self.nucleate(*t_nuc)
                k += 1
            else:
                heapq.heappop(self.heap)
                self.annihilate(i)
        self.time = until

    def state(self) -> PngState:
        return PngState(self.time, tuple(self.steps))


@dataclass(frozen=True)
class PngTrajectory:
    nucleations: PointCloud
    horizon: float
    snapshots: tuple[PngState, ...]
    events: int = 0
    _sorted: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def snapshot_times(self) -> tuple[float, ...]:
        return tuple(s.time for s in self.snapshots)

    def state_at(self, t: float) -> PngState:
        if not 0 <= t <= self.horizon:
            raise OutOfRangeError(f"t={t} outside [0, {self.horizon}]")
        times = self.snapshot_times
        j = bisect_right(times, t) - 1
        snap = self.snapshots[j]
        if snap.time == t:
            return snap
        # re-advance from the nearest earlier snapshot
        pts = self._sorted
        lo = bisect_left(pts[:, 0], snap.time)
        ids = itertools.count(1 + max((st.id for st in snap.steps), default=-1))
        eng = _Engine(snap, ids)
        eng.run(pts[lo:], t)
        return eng.state()

    def height_at(self, t: float, x: float) -> int:
        if abs(x) >= t:
            if not 0 <= t <= self.horizon:
                raise OutOfRangeError(f"t={t} outside [0, {self.horizon}]")
            return 0
        return self.state_at(t).height(x)

    def grid_csv(self, times: Sequence[float], xs: Sequence[float]) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "h"])
        for t in times:
            st = self.state_at(t)
            for x in xs:
                w.writerow([f"{t:.17g}", f"{x:.17g}", st.height(x) if abs(x) < t else 0])
        return buf.getvalue()

    def metadata(self) -> dict:
        return {"horizon": self.horizon, "nucleations": len(self.nucleations), "events": self.events,
                "snapshots": list(self.snapshot_times)}


def simulate_png(nucleations: PointCloud, horizon: float, snapshot_times: Sequence[float] = ()) -> PngTrajectory:
    """Run the PNG dynamics driven by ``nucleations`` up to ``horizon``.

    States are kept at t=0, at each requested snapshot time and at the horizon.
    """
    if nucleations.region != "cone":
        raise ValueError("PNG nucleations must be a cone cloud")
    pts = nucleations.points
    if len(pts) and (np.any(np.abs(pts[:, 1]) >= pts[:, 0]) or np.any(pts[:, 0] >= horizon)):
        raise ValueError("nucleation outside the cone {|y| < s < horizon}")
    times = sorted({float(t) for t in snapshot_times} | {float(horizon)})
    if times and (times[0] < 0 or times[-1] > horizon):
        raise OutOfRangeError("snapshot times must lie in [0, horizon]")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    srt = pts[order]
    eng = _Engine(PngState(0.0), itertools.count())
    snaps = [eng.state()]
    k = 0
    for t in times:
        k2 = bisect_left(srt[:, 0], t)
        eng.run(srt[k:k2], t)
        k = k2
        snaps.append(eng.state())
    uniq = {s.time: s for s in snaps}
    return PngTrajectory(nucleations, float(horizon), tuple(uniq[t] for t in sorted(uniq)),
                         events=eng.nucleations + eng.collisions, _sorted=srt)


def height_at(traj: PngTrajectory, t: float, x: float) -> int:
    return traj.height_at(t, x)


def linear_centering(c: float, eps: float) -> Callable[[float, float], float]:
    """Centering c * t / eps^2 matching the leading linear growth h(T, 0) ~ c T."""
    return lambda t, x: c * t / eps ** 2


def rescale_png(height, eps: float, t: float, x: float,
                centering: Callable[[float, float], float] | None = None) -> float:
    """eps * h(eps^-3 t, eps^-2 x) - centering(t, x).

    ``height`` is a :class:`PngTrajectory` or any callable ``h(T, X)``.
    """
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    T, X = t / eps ** 3, x / eps ** 2
    h = height.height_at(T, X) if isinstance(height, PngTrajectory) else height(T, X)
    c = centering(t, x) if centering is not None else 0.0
    return eps * h - c


# --- ensembles at the origin --------------------------------------------------

def sample_backward_cone(T: float, rng: RngSpec | np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Unit-intensity nucleations in the backward light cone of (T, 0), in light-cone coordinates.

    Returns (u, v) = (s + y, s - y), uniform on (0, T)^2; the region has
    (s, y)-area T^2/2.
    """
    g = as_generator(rng)
    n = int(g.poisson(T * T / 2))
    uv = g.random((n, 2)) * T
    return uv[:, 0], uv[:, 1]


def origin_heights(u: np.ndarray, v: np.ndarray, times: Sequence[float]) -> list[int]:
    """h(t, 0) for each t, from nucleations given in light-cone coordinates."""
    order = np.argsort(u, kind="stable")
    u, v = u[order], v[order]
    out = []
    for t in times:
        keep = (u < t) & (v < t)
        out.append(chain_length_uv(u[keep], v[keep]) if keep.any() else 0)
    return out


def origin_height_samples(times: Sequence[float], trials: int, rng: RngSpec,
                          method: str = "chain") -> np.ndarray:
    """h(t, 0) over independent droplet trajectories; row i uses stream ``rng.substream(i)``.

    ``method="chain"`` evaluates the longest-chain representation;
    ``method="events"`` runs the event-driven PNG on the same nucleations.
    """
    times = [float(t) for t in times]
    T = max(times)
    out = np.empty((trials, len(times)), dtype=np.int64)
    for i in range(trials):
        u, v = sample_backward_cone(T, rng.substream(i))
        if method == "chain":
            out[i] = origin_heights(u, v, times)
        elif method == "events":
            s, y = (u + v) / 2, (u - v) / 2
            cloud = PointCloud(np.column_stack([s, y]), region="cone", horizon=T + 1e-9)
            traj = simulate_png(cloud, T, snapshot_times=times)
            out[i] = [traj.height_at(t, 0.0) for t in times]
        else:
            raise ValueError(f"unknown method {method!r}")
    return out


def estimate_growth_constant(T: float, trials: int, rng: RngSpec) -> tuple[float, float]:
    """Monte Carlo estimate of c = h(T, 0)/T and its standard error."""
    h = origin_height_samples([T], trials, rng)[:, 0] / T
    return float(h.mean()), float(h.std(ddof=1) / np.sqrt(trials))
