"""Deterministic random number generation.

The generator is SplitMix64: output i (1-indexed) is ``mix(seed + i * GAMMA)``
with all arithmetic mod 2**64, so the stream is a pure function of (seed, i)
and identical on every platform. Constants:

    GAMMA = 0x9E3779B97F4A7C15
    mix(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
            z ^= z >> 27; z *= 0x94D049BB133111EB
            z ^= z >> 31

Floats in [0, 1) are the top 53 bits scaled by 2**-53. Vectorized draws
(`randoms`, `normals`) consume the same stream positions as the scalar
methods, so mixing call styles never changes the sequence.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Counter-based SplitMix64 stream seeded with a 64-bit integer."""

    def __init__(self, seed: int):
        self._seed = seed & MASK64
        self._count = 0

    def u64(self) -> int:
        self._count += 1
        return _mix((self._seed + self._count * GAMMA) & MASK64)

    def _u64_block(self, n: int) -> np.ndarray:
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        z = (np.uint64(self._seed) + idx * np.uint64(GAMMA))
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
        return z ^ (z >> np.uint64(31))

    def random(self) -> float:
        return (self.u64() >> 11) * 2.0**-53

    def randoms(self, n: int) -> np.ndarray:
        """n floats in [0, 1), same positions as n `random()` calls."""
        return (self._u64_block(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def normal(self) -> float:
        # Box-Muller; two fresh draws per value keeps the stream position
        # a simple function of the call count.
        u1 = (self.u64() >> 11) + 1  # in (0, 2**53]
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(u1 * 2.0**-53)) * math.cos(2.0 * math.pi * u2)

    def normals(self, n: int) -> np.ndarray:
        block = self._u64_block(2 * n) >> np.uint64(11)
        u1 = (block[0::2].astype(np.float64) + 1.0) * 2.0**-53
        u2 = block[1::2].astype(np.float64) * 2.0**-53
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)

    def below(self, n: int) -> int:
        """Integer in [0, n). Modulo reduction; bias is < n / 2**64."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        return self.u64() % n

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
