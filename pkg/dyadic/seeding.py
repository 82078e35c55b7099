"""
Counter-based splitmix64 streams.

A generator seeded with ``s`` produces ``mix(s + k * GOLDEN)`` for k = 1, 2, ...; drawing a
block of values at once gives exactly the values of the same number of sequential draws.
"""
from zlib import crc32

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
MASK = (1 << 64) - 1
_MUL_1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL_2 = np.uint64(0x94D049BB133111EB)


def mix64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finaliser applied element-wise to uint64 values."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over='ignore'):
        z = (z ^ (z >> np.uint64(30))) * _MUL_1
        z = (z ^ (z >> np.uint64(27))) * _MUL_2
    return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, *tags) -> int:
    """Independent 64-bit seed for a named sub-stream, e.g. ``derive_seed(seed, 'mu')``."""
    state = int(seed) & MASK
    for tag in tags:
        salt = crc32(str(tag).encode('utf-8'))
        state = int(mix64(np.array([(state ^ (salt * GOLDEN)) & MASK], dtype=np.uint64))[0])
    return state


class SplitMix64:
    """
    Seeded splitmix64 generator.

    :param seed: Any integer; reduced modulo 2^64.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK
        self.counter = 0

    def raw(self, n: int) -> np.ndarray:
        """The next ``n`` raw 64-bit outputs."""
        steps = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        with np.errstate(over='ignore'):
            states = np.uint64(self.seed) + steps * np.uint64(GOLDEN)
        self.counter += n
        return mix64(states)

    def next_u64(self) -> int:
        return int(self.raw(1)[0])

    def uniform(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """``n`` doubles uniform on [low, high), 53 random bits each."""
        unit = (self.raw(n) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
        return low + (high - low) * unit

    def signs(self, n: int) -> np.ndarray:
        return np.where(self.raw(n) >> np.uint64(63), -1.0, 1.0)

    def normal(self, n: int) -> np.ndarray:
        """Standard normal draws (Box-Muller over two uniform blocks)."""
        u1 = 1.0 - self.uniform(n)
        u2 = self.uniform(n)
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)

    def integers(self, n: int, high: int) -> np.ndarray:
        """``n`` integers in [0, high)."""
        return np.minimum((self.uniform(n) * high).astype(np.int64), high - 1)
