"""Reproducible random streams.

Every stochastic routine takes an explicit :class:`RngSpec`.  A spec maps to a
counter-based Philox generator keyed by ``(seed, stream)``, so independent
trials can be given independent streams and replayed bit-exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngSpec:
    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) <= _U64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self) -> np.random.Generator:
        # 128-bit Philox key: low word = seed, high word = stream
        return np.random.Generator(np.random.Philox(key=[int(self.seed), int(self.stream)]))

    def substream(self, index: int) -> "RngSpec":
        """Spec for trial ``index``; distinct indices give independent streams."""
        return RngSpec(self.seed, (int(self.stream) + int(index)) & _U64)


def as_generator(rng: RngSpec | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return rng.generator()


def entropy_seed() -> int:
    return int(np.random.SeedSequence().entropy & _U64)
