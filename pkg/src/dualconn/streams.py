"""Seeded random streams.

A stream is addressed by ``(seed, stream_id, *keys)``. The keys become the
spawn key of a :class:`numpy.random.SeedSequence`, so the numbers drawn for a
given chunk of work depend only on its address and never on which worker
ran it or in what order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RandomStream", "as_generator"]

# stream ids, one per purpose
TRIPLES = 1
PPP = 2
INTERFERENCE = 3
CONDITIONAL = 4
HISTOGRAM = 5
TWO_CELL = 6


@dataclass(frozen=True)
class RandomStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.stream_id < 0:
            raise ValueError("stream_id must be nonnegative")

    def generator(self, *keys: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *keys))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, stream_id: int) -> "RandomStream":
        return RandomStream(self.seed, stream_id)


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, a RandomStream or an int seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RandomStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(int(rng))
    raise TypeError(f"cannot make a random generator from {type(rng).__name__}")
