"""Seeded uniform hash shared by coordinated sketchers.

Two parties that agree on a 64-bit seed obtain the same value
``hash_unit(seed, i)`` for every row index ``i`` without communicating.
The construction is a SplitMix64 stream keyed by ``mix64(seed)``: the i-th
value is ``mix64(mix64(seed) + (i + 1) * GOLDEN)``, whose top 53 bits are
mapped into the open interval (0, 1).
"""
from dataclasses import dataclass
import hashlib

import numpy as np

from . import _backend
from ._pykernels import GOLDEN, MASK64, _mix64_array, mix64

__all__ = [
    "SeededHash",
    "hash_unit",
    "hash_units",
    "derive_seed",
    "derive_seeds",
    "mix64",
    "check_seed",
]


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def _label_to_int(label):
    if isinstance(label, (int, np.integer)):
        return int(label) & MASK64
    digest = hashlib.blake2b(str(label).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_seed(seed, *labels):
    """Derive a child seed from ``seed`` along a path of int or str labels.

    >>> derive_seed(7, "trial", 3) == derive_seed(7, "trial", 3)
    True
    """
    s = check_seed(seed)
    for label in labels:
        s = mix64(s ^ mix64((_label_to_int(label) + GOLDEN) & MASK64))
    return s


def derive_seeds(seed, *labels, count):
    """``[derive_seed(seed, *labels, r) for r in range(count)]`` as a uint64 array."""
    parent = np.uint64(derive_seed(seed, *labels))
    with np.errstate(over="ignore"):
        child = _mix64_array(np.arange(count, dtype=np.uint64) + np.uint64(GOLDEN))
        return _mix64_array(child ^ parent)


def hash_units(seed, indices):
    """Vectorized ``hash_unit`` over an array of nonnegative indices."""
    return _backend.kernels.hash_units(check_seed(seed), np.asarray(indices, dtype=np.int64))


def hash_unit(seed, i):
    """Deterministic pseudo-uniform value in (0, 1) for index ``i``."""
    if isinstance(seed, SeededHash):
        seed = seed.seed
    return float(hash_units(seed, np.array([i], dtype=np.int64))[0])


@dataclass(frozen=True)
class SeededHash:
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "seed", check_seed(self.seed))

    def __call__(self, i):
        return hash_unit(self.seed, i)

    def units(self, indices):
        return hash_units(self.seed, indices)
