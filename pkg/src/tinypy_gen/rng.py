"""Seeded random streams.

Every stream is a :class:`random.Random` (Mersenne Twister MT19937) seeded with
a 64-bit integer.  Child streams are derived with the SplitMix64 finalizer:
``split(seed, i) = mix64(mix64(seed) ^ mix64(i + GOLDEN))``, so attempt ``i``
of a corpus build sees the same numbers no matter which worker runs it or on
which platform.  Only ``random()`` and ``randrange()`` are drawn from the
stream; both are stable across CPython releases for integer seeds.
"""
from __future__ import annotations

import random

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
DEFAULT_SEED = 20240101


def mix64(x: int) -> int:
    """SplitMix64 output function."""
    x = (x + GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def split(seed: int, index: int) -> int:
    """Seed of the ``index``-th child stream of ``seed``."""
    return mix64(mix64(seed & MASK64) ^ mix64((index + GOLDEN) & MASK64))


def stream(seed: int, index: int | None = None) -> random.Random:
    """A fresh stream for ``seed`` (or its ``index``-th child)."""
    if index is not None:
        seed = split(seed, index)
    return random.Random(seed & MASK64)
