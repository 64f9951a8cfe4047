"""Deterministic seed derivation.

Every stochastic routine in the package takes an explicit 64-bit seed and
derives sub-stream seeds from it through the two helpers below, so that

* identical inputs reproduce identical output bit-for-bit, and
* replications can run concurrently without sharing generator state.

Replication seeds use the XOR scheme ``seed ^ replication_index``;
independent sub-streams (pilot runs, permutation draws, ...) are derived
with a splitmix64 hash chain so they cannot collide with replication
seeds of the parent stream.
"""

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, *tags: int) -> int:
    """Derive an independent sub-stream seed from ``seed`` and integer tags."""
    x = seed & _MASK64
    for t in tags:
        x = splitmix64(x ^ (t & _MASK64))
    return x


def replication_seed(seed: int, rep: int) -> int:
    """Per-replication seed: ``seed XOR rep``."""
    return (seed ^ rep) & _MASK64


def fnv1a64(text: str) -> int:
    """Stable 64-bit hash for mapping names to seed tags."""
    h = 0xCBF29CE484222325
    for b in text.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return h


def rng_from(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed & _MASK64)
