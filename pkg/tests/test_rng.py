import math

import numpy as np

from padesdp.rng import XorShift64Star

M64 = (1 << 64) - 1


def reference_stream(seed, count):
    """Straight transcription of splitmix64 seeding plus xorshift64*."""
    z = (seed + 0x9E3779B97F4A7C15) & M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    s = (z ^ (z >> 31)) or 1
    out = []
    for _ in range(count):
        s ^= s >> 12
        s = (s ^ (s << 25)) & M64
        s ^= s >> 27
        out.append((s * 0x2545F4914F6CDD1D) & M64)
    return out


class TestXorShift:
    def test_matches_reference(self):
        for seed in (0, 1, 42, 2**63 + 5):
            g = XorShift64Star(seed)
            assert [g.next_u64() for _ in range(20)] == reference_stream(seed, 20)

    def test_reproducible(self):
        a, b = XorShift64Star(7), XorShift64Star(7)
        np.testing.assert_array_equal(a.normal((3, 4)), b.normal((3, 4)))
        np.testing.assert_array_equal(a.uniform(5), b.uniform(5))

    def test_seeds_differ(self):
        assert XorShift64Star(1).next_u64() != XorShift64Star(2).next_u64()

    def test_uniform_from_bits(self):
        ref = reference_stream(3, 4)
        u = XorShift64Star(3).uniform(4)
        np.testing.assert_array_equal(u, [((r >> 11) + 0.5) / 2.0**53 for r in ref])

    def test_uniform_range(self):
        u = XorShift64Star(5).uniform(20_000, 0.5, 1.5)
        assert u.min() > 0.5 and u.max() < 1.5
        assert abs(u.mean() - 1.0) < 0.01

    def test_box_muller_pair(self):
        u1, u2 = XorShift64Star(9).uniform(2)
        z = XorShift64Star(9).normal(2)
        r = math.sqrt(-2 * math.log(u1))
        np.testing.assert_allclose(z, [r * math.cos(2 * math.pi * u2), r * math.sin(2 * math.pi * u2)], rtol=1e-15)

    def test_normal_moments(self):
        z = XorShift64Star(11).normal(40_000)
        assert abs(z.mean()) < 0.02
        assert abs(z.var() - 1.0) < 0.03

    def test_bernoulli(self):
        b = XorShift64Star(13).bernoulli(0.3, 20_000)
        assert b.dtype == bool
        assert abs(b.mean() - 0.3) < 0.015

    def test_scalar_draws(self):
        g = XorShift64Star(0)
        assert isinstance(g.uniform(), float)
        assert isinstance(g.normal(), float)
