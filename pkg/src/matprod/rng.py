"""Deterministic hierarchical random-number streams.

A stream is a value object: a 64-bit master seed plus a derivation path of
nonnegative integers. Identical (seed, path) pairs always reproduce the same
scalar sequence, and distinct paths give statistically independent streams,
so replications can be farmed out to any number of workers without changing
a single sampled bit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream", "as_generator"]

_SEED_MAX = 2**64 - 1


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream identified by (seed, path)."""

    seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.seed, int) or not 0 <= self.seed <= _SEED_MAX:
            raise ValueError(f"seed must be a 64-bit nonnegative integer, got {self.seed!r}")
        path = tuple(int(i) for i in self.path)
        if any(i < 0 for i in path):
            raise ValueError(f"derivation path must be nonnegative integers, got {self.path!r}")
        object.__setattr__(self, "path", path)

    def derive(self, *indices: int) -> "RngStream":
        """Child stream obtained by appending indices to the path."""
        return RngStream(self.seed, self.path + tuple(int(i) for i in indices))

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the origin of this stream."""
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))


def as_generator(rng: "RngStream | np.random.Generator") -> np.random.Generator:
    """Accept either a stream or a live generator.

    Passing a generator lets one routine make several draws in sequence;
    passing a stream always restarts from the stream origin.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")
