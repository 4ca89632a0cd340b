"""Seeded, splittable random source shared by every sampler."""
from __future__ import annotations

import numpy as np

from . import kernels


def _mix_seed(seed: int, *path: int) -> np.uint64:
    ss = np.random.SeedSequence([seed & ((1 << 64) - 1), *path])
    return ss.generate_state(1, dtype=np.uint64)[0]


class Rng:
    """splitmix64 stream; the state lives in a one-cell uint64 array so the
    kernels can advance it in place."""

    def __init__(self, seed: int = 0, _path: tuple = ()):
        self.seed = seed
        self.path = _path
        self.state = np.array([_mix_seed(seed, *_path)], dtype=np.uint64)

    def split(self, i: int) -> "Rng":
        """Independent child stream number ``i``."""
        return Rng(self.seed, self.path + (i,))

    def u64(self) -> int:
        with np.errstate(over="ignore"):
            return int(kernels.next_u64(self.state))

    def random(self) -> float:
        with np.errstate(over="ignore"):
            return float(kernels.next_double(self.state))

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), ``n`` of any size."""
        if n <= 0:
            raise ValueError("n must be positive")
        if n < (1 << 63):
            with np.errstate(over="ignore"):
                return int(kernels.next_below(self.state, n))
        bits = n.bit_length()
        words = (bits + 63) // 64
        excess = words * 64 - bits
        while True:
            r = 0
            for _ in range(words):
                r = (r << 64) | self.u64()
            r >>= excess
            if r < n:
                return r


def as_rng(rng: Rng | int | None) -> Rng:
    if rng is None:
        return Rng(0)
    if isinstance(rng, Rng):
        return rng
    return Rng(int(rng))
