"""Seeded xorshift64* generator with Box-Muller normals.

Instances are generated from this generator rather than numpy's so that the
bit stream is fully specified:

    state ^= state >> 12; state ^= state << 25; state ^= state >> 27
    output = state * 0x2545F4914F6CDD1D  (mod 2^64)

A uniform double in (0, 1) is (output >> 11 + 0.5) / 2^53.  Normals use the
Box-Muller pair sqrt(-2 log u1) (cos 2 pi u2, sin 2 pi u2), consumed in order.
The state is seeded with splitmix64(seed) so that seed 0 is valid.
"""

from math import cos, log, pi, sin, sqrt

import numpy as np

_MASK = (1 << 64) - 1
_MULT = 0x2545F4914F6CDD1D


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed: int = 0):
        self.state = _splitmix64(int(seed) & _MASK) or 1
        self._spare = None

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK
        x ^= x >> 27
        self.state = x
        return (x * _MULT) & _MASK

    def uniform(self, size=None, low: float = 0.0, high: float = 1.0):
        """Uniform samples in (low, high)."""
        if size is None:
            u = ((self.next_u64() >> 11) + 0.5) / float(1 << 53)
            return low + (high - low) * u
        n = int(np.prod(size))
        u = np.array([((self.next_u64() >> 11) + 0.5) for _ in range(n)]) / float(1 << 53)
        return (low + (high - low) * u).reshape(size)

    def _normal(self) -> float:
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1, u2 = self.uniform(), self.uniform()
        r = sqrt(-2.0 * log(u1))
        self._spare = r * sin(2.0 * pi * u2)
        return r * cos(2.0 * pi * u2)

    def normal(self, size=None):
        if size is None:
            return self._normal()
        n = int(np.prod(size))
        return np.array([self._normal() for _ in range(n)]).reshape(size)

    def bernoulli(self, p: float, size):
        return self.uniform(size) < p
