"""Seed handling.

Every random stream is a Philox-4x64 counter-based generator keyed by a 64-bit
seed. Component seeds are derived from a master seed with the SplitMix64
finalizer:

    mix(z) = splitmix64_finalize(z + 0x9E3779B97F4A7C15)
    derive_seed(master, v1, ..., vk) = fold s <- mix(mix(s) XOR v) starting at mix(master)

so the same (master, path) pair gives the same stream on any platform.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix(z: int) -> int:
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *path: int) -> int:
    s = mix(int(master) & MASK64)
    for v in path:
        s = mix(mix(s) ^ (int(v) & MASK64))
    return s


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & MASK64))
