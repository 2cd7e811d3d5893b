"""Deterministic counter-based random numbers (SplitMix64).

Every stochastic object in the library draws from this generator, so a
(seed, draw order) pair pins results down exactly, independent of platform,
process count, or numpy version.  The stream is the SplitMix64 sequence:

    output[i] = mix64(seed + (i + 1) * 0x9E3779B97F4A7C15)   (mod 2^64)

where mix64 is the murmur-style finalizer (xor-shift 30, multiply
0xBF58476D1CE4E5B9, xor-shift 27, multiply 0x94D049BB133111EB,
xor-shift 31).  Because outputs are a pure function of the counter, block
draws vectorize and scalar draws agree with them bit for bit.

Documented derived draws:

* ``random`` / ``doubles``: top 53 bits of a raw word, scaled by 2^-53.
* ``normals``: Box-Muller on consecutive double pairs (u1, u2):
  ``radius = sqrt(-2 log(1 - u1))``, outputs ``radius*cos(2 pi u2)`` then
  ``radius*sin(2 pi u2)``; an odd count discards the trailing sine.
* ``below(n)``: rejection sampling on masked raw words (no modulo bias).
* ``sample_without_replacement``: partial Fisher-Yates over 0..n-1 using
  ``below`` for each swap index.
* ``derive_seed(seed, *keys)``: per-key fold
  ``state = mix64((state + GOLDEN) ^ mix64(key))``, used to give every
  (cell, trial, component) its own independent stream.
"""

from __future__ import annotations

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def _mix(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _mix_block(z: np.ndarray) -> np.ndarray:
    # uint64 array arithmetic wraps silently, matching the scalar path.
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministically combine a master seed with integer keys."""
    state = int(seed) & _MASK
    for key in keys:
        state = _mix(((state + GOLDEN) & _MASK) ^ _mix(int(key) & _MASK))
    return state


class Rng:
    """Counter-based SplitMix64 stream."""

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK
        self._counter = 0

    def spawn(self, *keys: int) -> "Rng":
        """Independent child stream keyed off this stream's seed."""
        return Rng(derive_seed(self.seed, *keys))

    # raw words ---------------------------------------------------------

    def u64(self) -> int:
        self._counter += 1
        return _mix((self.seed + self._counter * GOLDEN) & _MASK)

    def u64_block(self, count: int) -> np.ndarray:
        if count < 0:
            raise ValueError("count must be nonnegative")
        start = self._counter + 1
        self._counter += count
        idx = np.arange(start, start + count, dtype=np.uint64)
        return _mix_block(idx * np.uint64(GOLDEN) + np.uint64(self.seed))

    # doubles and gaussians ---------------------------------------------

    def random(self) -> float:
        return (self.u64() >> 11) * 2.0**-53

    def doubles(self, count: int) -> np.ndarray:
        return (self.u64_block(count) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normals(self, shape) -> np.ndarray:
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        count = int(np.prod(shape)) if shape else 1
        pairs = (count + 1) // 2
        u = self.doubles(2 * pairs)
        u1, u2 = u[0::2], u[1::2]
        radius = np.sqrt(-2.0 * np.log1p(-u1))  # 1-u1 in (0,1], log is finite
        angle = 2.0 * np.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:count].reshape(shape)

    # integers and subsets ----------------------------------------------

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), rejection sampled."""
        if n <= 0:
            raise ValueError("n must be positive")
        mask = (1 << (n - 1).bit_length()) - 1
        while True:
            v = self.u64() & mask
            if v < n:
                return v

    def bernoulli(self, count: int, p: float) -> np.ndarray:
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        return self.doubles(count) < p

    def sample_without_replacement(self, n: int, m: int) -> np.ndarray:
        """m distinct integers from [0, n), partial Fisher-Yates, draw order."""
        if not 0 <= m <= n:
            raise ValueError("need 0 <= m <= n")
        swapped: dict[int, int] = {}
        out = np.empty(m, dtype=np.int64)
        for i in range(m):
            j = i + self.below(n - i)
            vi = swapped.get(i, i)
            vj = swapped.get(j, j)
            out[i] = vj
            swapped[j] = vi
            swapped[i] = vj
        return out

    def signs(self, count: int) -> np.ndarray:
        """Fair +-1 draws (+1 where the next double is < 0.5)."""
        return np.where(self.doubles(count) < 0.5, 1.0, -1.0)
