"""Seeded splitmix64 generator mapped to standard normals.

The experiment CLI promises bitwise-identical output for identical
config+seed, so random data comes from this tiny fixed-algorithm generator
rather than from numpy's (version-dependent) bit generators.
"""

import math

import numpy as np

__all__ = ["SplitMix64", "normal_block"]

_MASK = (1 << 64) - 1


class SplitMix64:
    """splitmix64: deterministic 64-bit stream from one integer seed."""

    def __init__(self, seed):
        self.state = int(seed) & _MASK

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return (z ^ (z >> 31)) & _MASK

    def uniform(self):
        """Double in (0, 1]."""
        return ((self.next_u64() >> 11) + 1) * 2.0**-53

    def normal(self, count):
        """Standard normals via Box-Muller."""
        out = np.empty(count)
        i = 0
        while i < count:
            u1 = self.uniform()
            u2 = self.uniform()
            r = math.sqrt(-2.0 * math.log(u1))
            out[i] = r * math.cos(2.0 * math.pi * u2)
            if i + 1 < count:
                out[i + 1] = r * math.sin(2.0 * math.pi * u2)
            i += 2
        return out


def normal_block(seed, n, ell=1, norm=None):
    """Seeded n x ell real standard-normal block (complex dtype), optionally
    rescaled to a requested Frobenius norm."""
    gen = SplitMix64(seed)
    W = gen.normal(n * ell).reshape(n, ell)
    if norm is not None:
        W *= norm / np.linalg.norm(W)
    return W.astype(complex)
