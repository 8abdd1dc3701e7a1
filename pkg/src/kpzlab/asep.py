"""Asymmetric simple exclusion on a ring or a closed segment.

Occupancy eta(x) = h(x) - h(x+1) in {+1 particle, -1 hole}.  A local minimum of
h at site x (particle at x-1, hole at x) flips to a local maximum at rate p,
which moves that particle one site to the right; a local maximum (hole at
x-1, particle at x) flips down at rate q = 1 - p, a left jump.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, OutOfRangeError
from .rng import RngSpec, as_generator


@dataclass
class AsepState:
    """Occupancy, height anchor h(0), clock and rates.

    ``right_jumps`` / ``left_jumps`` count flips min->max and max->min since
    construction; ``events`` is their sum.
    """

    eta: np.ndarray
    p: float
    height_anchor: int = 0
    time: float = 0.0
    ring: bool = True
    right_jumps: int = 0
    left_jumps: int = 0

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=np.int8).copy()
        if self.eta.ndim != 1 or len(self.eta) < 2:
            raise DomainError("need at least two sites")
        if not np.all(np.abs(self.eta) == 1):
            raise DomainError("occupancy values must be +1 or -1")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p must lie in [0,1], got {self.p}")

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def size(self) -> int:
        return len(self.eta)

    @property
    def events(self) -> int:
        return self.right_jumps + self.left_jumps

    def copy(self) -> "AsepState":
        return replace(self, eta=self.eta.copy())

    def heights(self) -> np.ndarray:
        """h(0..L): h(x) = h(0) - sum_{0<=y<x} eta(y)."""
        return self.height_anchor - np.concatenate([[0], np.cumsum(self.eta, dtype=np.int64)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "eta", "h"])
        for x, (e, h) in enumerate(zip(self.eta, self.heights()[:-1])):
            w.writerow([x, int(e), int(h)])
        return buf.getvalue()

    def metadata(self) -> dict:
        return {"p": self.p, "q": self.q, "L": self.size, "T": self.time, "ring": self.ring,
                "events": self.events, "right_jumps": self.right_jumps, "left_jumps": self.left_jumps}


def init_random_walk(L: int, rng: RngSpec | np.random.Generator, p: float = 0.5,
                     ring: bool = True) -> AsepState:
    """h(0) = 0 with fair +-1 increments; on a ring the increments are conditioned to sum to 0."""
    if L < 2 or (ring and L % 2):
        raise DomainError(f"ring initial data needs an even size >= 2, got L={L}")
    g = as_generator(rng)
    if ring:
        eta = -np.ones(L, dtype=np.int8)
        eta[g.permutation(L)[: L // 2]] = 1
    else:
        eta = np.where(g.random(L) < 0.5, 1, -1).astype(np.int8)
    return AsepState(eta, p=p, ring=ring)


def height_from_occupancy(state: AsepState, x: int) -> int:
    L = state.size
    if state.ring:
        if not -L <= x <= L:
            raise OutOfRangeError(f"site {x} outside [-{L}, {L}]")
    elif not 0 <= x <= L:
        raise OutOfRangeError(f"site {x} outside [0, {L}]")
    if x >= 0:
        return int(state.height_anchor - state.eta[:x].sum(dtype=np.int64))
    # mirrored sum: h(x) = h(0) + sum_{x<=y<0} eta(y mod L)
    return int(state.height_anchor + state.eta[x:].sum(dtype=np.int64))


# --- local moves ---------------------------------------------------------------

def _bond(state: AsepState, x: int) -> tuple[int, int] | None:
    """Sites (x-1, x) forming the bond at height site x, or None across a closed end."""
    L = state.size
    if state.ring:
        return (x - 1) % L, x % L
    if 1 <= x <= L - 1:
        return x - 1, x
    return None


def is_local_min(state: AsepState, x: int) -> bool:
    b = _bond(state, x)
    return b is not None and state.eta[b[0]] == 1 and state.eta[b[1]] == -1


def is_local_max(state: AsepState, x: int) -> bool:
    b = _bond(state, x)
    return b is not None and state.eta[b[0]] == -1 and state.eta[b[1]] == 1


def jump_particle(state: AsepState, src: int, direction: int) -> None:
    """Particle-picture move from ``src`` one site right (+1) or left (-1) into a hole."""
    L = state.size
    if direction not in (1, -1):
        raise DomainError(f"direction must be +1 or -1, got {direction}")
    dst = src + direction
    if state.ring:
        dst %= L
    elif not 0 <= dst < L:
        raise DomainError(f"jump {src}->{dst} leaves the segment")
    if state.eta[src] != 1 or state.eta[dst] != -1:
        raise DomainError(f"illegal jump {src}->{dst}")
    state.eta[src], state.eta[dst] = -1, 1
    # h(0) moves only when a particle crosses the bond between sites L-1 and 0
    if state.ring and direction == 1 and src == L - 1:
        state.height_anchor += 2
    elif state.ring and direction == -1 and src == 0:
        state.height_anchor -= 2
    if direction == 1:
        state.right_jumps += 1
    else:
        state.left_jumps += 1


def flip_height(h: np.ndarray, x: int, ring: bool = True) -> None:
    """Height-picture move on h(0..L-1) (balanced ring) or h(0..L) (segment): toggle the extremum at x."""
    n = len(h)
    if ring:
        # on a ring the neighbours of h(0) are h(L-1) and h(1); the periodic
        # profile is h(y) for y in 0..L-1
        left, right = h[(x - 1) % n], h[(x + 1) % n]
    else:
        if not 1 <= x <= n - 2:
            raise DomainError(f"no extremum move at boundary site {x}")
        left, right = h[x - 1], h[x + 1]
    if left == right == h[x] + 1:
        h[x] += 2
    elif left == right == h[x] - 1:
        h[x] -= 2
    else:
        raise DomainError(f"site {x} is not a local extremum")


# --- Gillespie dynamics --------------------------------------------------------

class _IndexedSet:
    """Set of ints with O(1) insert/remove/uniform choice."""

    def __init__(self, items=()):
        self.items: list[int] = []
        self.pos: dict[int, int] = {}
        for v in items:
            self.add(v)

    def __len__(self):
        return len(self.items)

    def add(self, v: int) -> None:
        if v not in self.pos:
            self.pos[v] = len(self.items)
            self.items.append(v)

    def discard(self, v: int) -> None:
        i = self.pos.pop(v, None)
        if i is None:
            return
        last = self.items.pop()
        if i < len(self.items):
            self.items[i] = last
            self.pos[last] = i

    def pick(self, u: float) -> int:
        return self.items[min(int(u * len(self.items)), len(self.items) - 1)]


def _height_sites(state: AsepState) -> range:
    return range(state.size) if state.ring else range(1, state.size)


def simulate_asep(state: AsepState, T: float, rng: RngSpec | np.random.Generator,
                  record: list | None = None) -> AsepState:
    """Run the continuous-time dynamics from ``state.time`` to ``T``; returns a new state.

    If ``record`` is a list, every event is appended to it as
    ``(time, site, "up" | "down")`` where site is the flipped height site.
    """
    if T < state.time:
        raise ValueError(f"target time {T} precedes state time {state.time}")
    out = state.copy()
    if T == state.time:
        return out
    g = as_generator(rng)
    L = out.size
    eta = out.eta
    mins = _IndexedSet(x for x in _height_sites(out) if is_local_min(out, x))
    maxs = _IndexedSet(x for x in _height_sites(out) if is_local_max(out, x))
    p, q = out.p, out.q
    t = out.time
    while True:
        total = p * len(mins) + q * len(maxs)
        if total <= 0:
            break
        t += g.exponential(1.0 / total)
        if t >= T:
            break
        u1, u2 = g.random(2)
        if u1 * total < p * len(mins):
            x = mins.pick(u2)
            jump_particle(out, _bond(out, x)[0], 1)
            kind = "up"
        else:
            x = maxs.pick(u2)
            jump_particle(out, _bond(out, x)[1], -1)
            kind = "down"
        if record is not None:
            record.append((t, x, kind))
        for y in (x - 1, x, x + 1):
            if out.ring:
                y %= L
            elif not 1 <= y <= L - 1:
                continue
            mins.discard(y)
            maxs.discard(y)
            if is_local_min(out, y):
                mins.add(y)
            elif is_local_max(out, y):
                maxs.add(y)
    out.time = float(T)
    return out


def replay_heights(h0: np.ndarray, events, ring: bool = True) -> list[np.ndarray]:
    """Drive the height picture with a recorded event list; returns h after each event."""
    h = np.array(h0, dtype=np.int64)
    out = []
    for _, x, _kind in events:
        flip_height(h, x, ring=ring)
        out.append(h.copy())
    return out


def rescale_weak_asymmetry(state: AsepState, eps: float, t: float, x: float,
                           time_tol: float = 1e-9) -> float:
    """eps * h(eps^-4 t, round(eps^-2 x)) - eps^-2 t / 2, read from a state at time eps^-4 t."""
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if abs((state.p - state.q) - eps) > 1e-12:
        raise DomainError(f"weak-asymmetry scaling needs p - q = eps, got p - q = {state.p - state.q}")
    T = t / eps ** 4
    if abs(state.time - T) > time_tol * max(1.0, T):
        raise OutOfRangeError(f"state is at time {state.time}, scaling needs {T}")
    site = int(np.rint(x / eps ** 2))
    return eps * height_from_occupancy(state, site) - t / (2 * eps ** 2)


def weak_asymmetry_p(eps: float) -> float:
    """p with p - q = eps."""
    if not 0 < eps <= 1:
        raise DomainError(f"eps must lie in (0, 1], got {eps}")
    return 0.5 * (1.0 + eps)
