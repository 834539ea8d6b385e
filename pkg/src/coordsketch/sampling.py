"""Coordinated row sampling: Priority Sampling, Threshold Sampling, and the
inverse-probability product estimator that works on either.

Each sketch keeps the sampled row indices, the rows themselves and a
threshold ``tau``. A row ``i`` with weight ``w_i`` (by default its squared
norm) and shared hash value ``h(i)`` has rank ``h(i) / w_i``; Priority
Sampling keeps the ``k`` smallest ranks and sets ``tau`` to the next one,
Threshold Sampling keeps every row with ``h(i) <= k * w_i / sum(w)``.
Because sketches of ``A`` and ``B`` built with the same seed see the same
``h``, rows that are heavy in both are likely to be sampled by both.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _backend
from .errors import CoordinationError, DimensionError, ParameterError
from .hashing import check_seed, hash_units
from .matrix import SparseMatrix, frob_sq_norm, row_sq_norms

__all__ = [
    "PRIORITY",
    "THRESHOLD",
    "SQUARED_NORM",
    "LEVERAGE",
    "SampleSketch",
    "Intersection",
    "priority_sample",
    "threshold_sample",
    "estimate_product",
    "intersect",
    "sketch_items",
    "inclusion_probabilities",
]

PRIORITY = "priority"
THRESHOLD = "threshold"
SQUARED_NORM = "squared_norm"
LEVERAGE = "leverage"

SPARSE_PAIRS = "sparse_pairs"
DENSE_ROWS = "dense_rows"
AUTO = "auto"


@dataclass(frozen=True, eq=False)
class SampleSketch:
    """Output of :func:`priority_sample` or :func:`threshold_sample`.

    ``rows`` holds the sampled rows in the order of ``indices``; ``n_rows``
    is the row count of the sketched matrix, used to check that two
    sketches index the same rows.
    """

    kind: str
    k: int
    seed: int
    indices: np.ndarray
    rows: SparseMatrix
    tau: float
    weight_mode: str = SQUARED_NORM
    n_rows: int = 0

    def __post_init__(self):
        if self.kind not in (PRIORITY, THRESHOLD):
            raise ParameterError(f"unknown sketch kind {self.kind!r}")
        if self.weight_mode not in (SQUARED_NORM, LEVERAGE):
            raise ParameterError(f"unknown weight mode {self.weight_mode!r}")
        idx = np.ascontiguousarray(self.indices, dtype=np.int64)
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        if self.rows.n_rows != idx.size:
            raise DimensionError("rows must align with indices")
        if idx.size > 1 and np.any(np.diff(idx) <= 0):
            raise ValueError("indices must be strictly increasing")

    @property
    def n_cols(self):
        return self.rows.n_cols

    @property
    def size(self):
        return int(self.indices.size)

    def __eq__(self, other):
        if not isinstance(other, SampleSketch):
            return NotImplemented
        return (
            (self.kind, self.k, self.seed, self.weight_mode, self.n_rows)
            == (other.kind, other.k, other.seed, other.weight_mode, other.n_rows)
            and _same_float(self.tau, other.tau)
            and np.array_equal(self.indices, other.indices)
            and self.rows == other.rows
        )

    __hash__ = None


def _same_float(a, b):
    return np.float64(a).tobytes() == np.float64(b).tobytes()


def _check_k(k):
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k!r}")
    return int(k)


def _ranks(A, seed, weights):
    """Candidate rows (nonzero rows) and their ranks h(i)/w_i."""
    cand = A.nonzero_rows()
    w = weights[cand]
    return cand, hash_units(seed, cand) / w


def _resolve_weights(A, weights):
    if weights is None:
        return row_sq_norms(A), SQUARED_NORM
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (A.n_rows,):
        raise DimensionError(f"weights must have length {A.n_rows}, got shape {w.shape}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ParameterError("weights must be finite and nonnegative")
    nz = A.nonzero_rows()
    if np.any(w[nz] == 0):
        bad = int(nz[np.flatnonzero(w[nz] == 0)[0]])
        raise ParameterError(f"row {bad} is nonzero but has zero weight")
    return w, LEVERAGE


def priority_sample(A, k, seed, weights=None):
    """Priority Sampling sketch of the rows of ``A``.

    Keeps the ``k`` nonzero rows with the smallest rank ``h(i) / w_i`` and
    records the (k+1)-st smallest rank as ``tau`` (``inf`` if ``A`` has at
    most ``k`` nonzero rows). ``weights`` overrides the default squared row
    norms, e.g. with leverage scores; the sketch is then tagged with
    ``weight_mode="leverage"``.
    """
    k = _check_k(k)
    seed = check_seed(seed)
    w, mode = _resolve_weights(A, weights)
    cand, ranks = _ranks(A, seed, w)
    pos, tau = _backend.kernels.select_priority(ranks, k)
    idx = cand[pos]
    return SampleSketch(PRIORITY, k, seed, idx, A.take_rows(idx), float(tau), mode, A.n_rows)


def threshold_sample(A, k, seed):
    """Threshold Sampling sketch: row ``i`` kept iff ``h(i) <= k * |A_i|^2 / |A|_F^2``.

    The expected number of kept rows is ``sum_i min(1, k |A_i|^2 / |A|_F^2) <= k``.
    """
    k = _check_k(k)
    seed = check_seed(seed)
    w = row_sq_norms(A)
    total = float(np.sum(w))
    if total <= 0:
        raise ParameterError("threshold sampling needs a matrix with a nonzero entry")
    cand = A.nonzero_rows()
    keep = hash_units(seed, cand) <= k * w[cand] / total
    idx = cand[keep]
    return SampleSketch(THRESHOLD, k, seed, idx, A.take_rows(idx), k / total, SQUARED_NORM, A.n_rows)


class Intersection(NamedTuple):
    indices: np.ndarray
    pos_a: np.ndarray
    pos_b: np.ndarray


def intersect(SA, SB):
    """Row indices kept by both sketches, with their positions in each."""
    a = SA.indices if isinstance(SA, SampleSketch) else np.asarray(SA, dtype=np.int64)
    b = SB.indices if isinstance(SB, SampleSketch) else np.asarray(SB, dtype=np.int64)
    return Intersection(*_backend.kernels.intersect_sorted(a, b))


def _check_coordinated(SA, SB):
    if SA.seed != SB.seed:
        raise CoordinationError(f"sketches use different seeds ({SA.seed} vs {SB.seed})")
    if SA.kind != SB.kind:
        raise CoordinationError(f"sketch kinds differ ({SA.kind} vs {SB.kind})")
    if SA.n_rows and SB.n_rows and SA.n_rows != SB.n_rows:
        raise CoordinationError(
            f"sketched matrices have different row counts ({SA.n_rows} vs {SB.n_rows})"
        )


def inclusion_probabilities(weights_a, tau_a, weights_b, tau_b):
    """``min(1, w_a * tau_a, w_b * tau_b)`` elementwise (``inf`` tau saturates)."""
    with np.errstate(invalid="ignore"):
        pa = np.asarray(weights_a, dtype=np.float64) * tau_a
        pb = np.asarray(weights_b, dtype=np.float64) * tau_b
    return np.minimum(1.0, np.minimum(pa, pb))


def weighted_product(SA, SB, weights_a, weights_b):
    """Inverse-probability estimate of ``A^T B`` given per-stored-row weights."""
    common, pos_a, pos_b = intersect(SA, SB)
    p = inclusion_probabilities(
        np.asarray(weights_a)[pos_a], SA.tau, np.asarray(weights_b)[pos_b], SB.tau
    )
    return _backend.kernels.weighted_outer(
        SA.rows.indptr, SA.rows.indices, SA.rows.data, pos_a,
        SB.rows.indptr, SB.rows.indices, SB.rows.data, pos_b,
        1.0 / p, SA.n_cols, SB.n_cols,
    )


def estimate_product(SA, SB):
    """Unbiased estimate ``W`` of ``A^T B`` from two coordinated sketches.

    ``W = sum_{i in I_A & I_B} A_i B_i^T / min(1, |A_i|^2 tau_A, |B_i|^2 tau_B)``.
    """
    _check_coordinated(SA, SB)
    if SA.weight_mode != SQUARED_NORM or SB.weight_mode != SQUARED_NORM:
        raise CoordinationError(
            "estimate_product needs squared-norm sketches; use solve_regression for leverage sketches"
        )
    return weighted_product(SA, SB, row_sq_norms(SA.rows), row_sq_norms(SB.rows))


def sketch_items(S, counting=SPARSE_PAIRS):
    """Number of stored scalars and indices.

    ``sparse_pairs`` counts one index per row, ``tau``, and a (column, value)
    pair per nonzero; ``dense_rows`` stores each row densely; ``auto`` takes
    the cheaper of the two.
    """
    n = S.size
    if counting == SPARSE_PAIRS:
        return n + 1 + 2 * S.rows.nnz
    if counting == DENSE_ROWS:
        return n + 1 + n * S.n_cols
    if counting == AUTO:
        return min(n + 1 + 2 * S.rows.nnz, n + 1 + n * S.n_cols)
    raise ParameterError(f"unknown counting mode {counting!r}")


def frob_weights(A):
    """Normalized squared row norms ``|A_i|^2 / |A|_F^2``."""
    total = frob_sq_norm(A)
    if total == 0:
        return np.zeros(A.n_rows)
    return row_sq_norms(A) / total
