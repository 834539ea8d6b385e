"""Linear-sketch baselines: ``Pi A`` for Gaussian, sign and CountSketch ``Pi``.

``Pi`` is generated from the seed alone, column by column, so two parties
sketching ``A`` and ``B`` (same row count) apply the same ``Pi`` and the
product is estimated by ``(Pi A)^T (Pi B)``.
"""
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import CoordinationError, DimensionError, ParameterError
from .hashing import check_seed, derive_seed, derive_seeds, hash_units

__all__ = [
    "GAUSSIAN",
    "SIGN",
    "COUNTSKETCH",
    "LINEAR_KINDS",
    "LinearSketch",
    "linear_sketch",
    "linear_estimate",
    "linear_items",
    "countsketch_hashes",
    "apply_countsketch",
]

GAUSSIAN = "gaussian"
SIGN = "sign"
COUNTSKETCH = "countsketch"
LINEAR_KINDS = (GAUSSIAN, SIGN, COUNTSKETCH)


@dataclass(frozen=True, eq=False)
class LinearSketch:
    kind: str
    k: int
    seed: int
    data: np.ndarray
    n_rows: int = 0

    def __post_init__(self):
        if self.kind not in LINEAR_KINDS:
            raise ParameterError(f"unknown linear sketch kind {self.kind!r}")
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] != self.k:
            raise DimensionError(f"data must have shape (k, d) with k={self.k}, got {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_cols(self):
        return self.data.shape[1]

    def __eq__(self, other):
        if not isinstance(other, LinearSketch):
            return NotImplemented
        return (
            (self.kind, self.k, self.seed, self.n_rows) == (other.kind, other.k, other.seed, other.n_rows)
            and self.data.tobytes() == other.data.tobytes()
        )

    __hash__ = None


def countsketch_hashes(seed, n, k):
    """Bucket in ``[0, k)`` and sign in ``{-1, +1}`` for each of ``n`` rows."""
    idx = np.arange(n, dtype=np.int64)
    u = hash_units(derive_seed(seed, COUNTSKETCH, "bucket"), idx)
    buckets = np.minimum((u * k).astype(np.int64), k - 1)
    signs = np.where(hash_units(derive_seed(seed, COUNTSKETCH, "sign"), idx) < 0.5, 1.0, -1.0)
    return buckets, signs


def apply_countsketch(A, buckets, signs, k):
    """``Pi A`` for the CountSketch with given per-row buckets and signs."""
    buckets = np.asarray(buckets, dtype=np.int64)
    if buckets.shape != (A.n_rows,):
        raise DimensionError("need one bucket per row")
    if buckets.size and (buckets.min() < 0 or buckets.max() >= k):
        raise ParameterError("bucket out of range")
    return _backend.kernels.countsketch_apply(
        buckets, np.asarray(signs, dtype=np.float64), A.indptr, A.indices, A.data, k, A.n_cols
    )


def linear_sketch(A, k, seed, kind):
    """Compress ``A`` (n x d) to the k x d matrix ``Pi A``.

    Gaussian and sign entries are scaled by ``1/sqrt(k)``; CountSketch puts a
    single +-1 per column of ``Pi`` and is applied as a scatter-add.
    """
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k!r}")
    k = int(k)
    seed = check_seed(seed)
    if kind == COUNTSKETCH:
        buckets, signs = countsketch_hashes(seed, A.n_rows, k)
        data = apply_countsketch(A, buckets, signs, k)
    elif kind in (GAUSSIAN, SIGN):
        row_seeds = derive_seeds(seed, kind, count=k)
        code = 0 if kind == GAUSSIAN else 1
        data = _backend.kernels.project_rows(code, row_seeds, A.indptr, A.indices, A.data, A.n_cols)
        data /= np.sqrt(k)
    else:
        raise ParameterError(f"unknown linear sketch kind {kind!r}")
    return LinearSketch(kind, k, seed, data, A.n_rows)


def linear_estimate(SA, SB):
    """``(Pi A)^T (Pi B)``."""
    if SA.kind != SB.kind:
        raise CoordinationError(f"sketch kinds differ ({SA.kind} vs {SB.kind})")
    if SA.seed != SB.seed:
        raise CoordinationError(f"sketches use different seeds ({SA.seed} vs {SB.seed})")
    if SA.k != SB.k:
        raise CoordinationError(f"sketch heights differ ({SA.k} vs {SB.k})")
    if SA.n_rows and SB.n_rows and SA.n_rows != SB.n_rows:
        raise CoordinationError("sketched matrices have different row counts")
    return SA.data.T @ SB.data


def linear_items(S):
    return int(S.data.shape[0] * S.data.shape[1])
