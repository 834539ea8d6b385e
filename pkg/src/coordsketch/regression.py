"""Sketched least-squares regression with leverage-score priority sampling.

The design matrix ``A`` is priority-sampled with ranks ``h(i) / l_i`` where
``l_i`` is the leverage score of row ``i``; the response ``b`` is
priority-sampled by squared magnitude with the same seed. The query side
estimates ``A^T b`` from the two sketches and solves against either the
exact Gram matrix ``A^T A`` or a Gram matrix rebuilt from the same leverage
sample (``single`` mode, which avoids storing a d x d block).
"""
from dataclasses import dataclass

import numpy as np

from .errors import CoordinationError, DimensionError, ParameterError
from .matrix import SparseMatrix, exact_product, row_sq_norms
from .sampling import (
    LEVERAGE,
    PRIORITY,
    SQUARED_NORM,
    SampleSketch,
    inclusion_probabilities,
    intersect,
    priority_sample,
    sketch_items,
)

__all__ = [
    "EXACT",
    "SINGLE",
    "LeverageScores",
    "ExactGram",
    "SampledGram",
    "RegressionSketch",
    "leverage_scores",
    "pinv_psd",
    "sketch_matrix_for_regression",
    "sketch_vector_for_regression",
    "estimate_rhs",
    "solve_regression",
    "regression_residual",
    "least_squares",
    "regression_items",
]

EXACT = "exact"
SINGLE = "single"

# relative eigenvalue cutoff for pseudo-inverting Gram matrices
PINV_RCOND = 1e-10
# default constant in k = ceil(c_reg * d / eps)
C_REG = 10


@dataclass(frozen=True)
class LeverageScores:
    scores: np.ndarray
    rank: int


@dataclass(frozen=True, eq=False)
class ExactGram:
    matrix: np.ndarray

    def gram(self):
        return self.matrix

    def items(self):
        return int(self.matrix.size)

    def __eq__(self, other):
        return isinstance(other, ExactGram) and self.matrix.tobytes() == other.matrix.tobytes() \
            and self.matrix.shape == other.matrix.shape


@dataclass(frozen=True, eq=False)
class SampledGram:
    """Reweighted sampled rows ``S A`` (dense, one row per sample) and the
    per-row scale ``1 / sqrt(p_i)`` that was applied."""

    rows: np.ndarray
    scale: np.ndarray

    def gram(self):
        return self.rows.T @ self.rows

    def items(self):
        # the rows are already in the sample and the scales follow from
        # the stored leverage scores and tau
        return 0

    def __eq__(self, other):
        return (
            isinstance(other, SampledGram)
            and self.rows.shape == other.rows.shape
            and self.rows.tobytes() == other.rows.tobytes()
            and self.scale.tobytes() == other.scale.tobytes()
        )


@dataclass(frozen=True, eq=False)
class RegressionSketch:
    sample: SampleSketch
    sampled_scores: np.ndarray
    gram: object

    @property
    def gram_mode(self):
        return EXACT if isinstance(self.gram, ExactGram) else SINGLE

    def __eq__(self, other):
        if not isinstance(other, RegressionSketch):
            return NotImplemented
        return (
            self.sample == other.sample
            and self.sampled_scores.tobytes() == other.sampled_scores.tobytes()
            and self.gram == other.gram
        )

    __hash__ = None


def pinv_psd(G, rcond=PINV_RCOND):
    """Pseudo-inverse of a symmetric PSD matrix and its numerical rank.

    Eigenvalues at or below ``rcond * max_eigenvalue`` are treated as zero.
    """
    G = np.asarray(G, dtype=np.float64)
    G = 0.5 * (G + G.T)
    vals, vecs = np.linalg.eigh(G)
    top = vals.max(initial=0.0)
    if top <= 0:
        return np.zeros_like(G), 0
    keep = vals > rcond * top
    inv = (vecs[:, keep] / vals[keep]) @ vecs[:, keep].T
    return inv, int(np.count_nonzero(keep))


def leverage_scores(A):
    """Leverage scores ``l_i = A_i (A^T A)^+ A_i^T``; they sum to rank(A)."""
    if A.n_rows < 1 or A.n_cols < 1:
        raise DimensionError("leverage scores need a non-empty matrix")
    ginv, rank = pinv_psd(exact_product(A, A))
    As = A.to_scipy()
    scores = np.asarray(As.multiply(As @ ginv).sum(axis=1)).ravel()
    scores = np.clip(scores, 0.0, 1.0)
    scores[np.diff(A.indptr) == 0] = 0.0
    return LeverageScores(scores, rank)


def _sampled_gram(sample, scores, tau):
    p = np.minimum(1.0, scores * tau)
    scale = 1.0 / np.sqrt(p)
    rows = sample.rows.to_dense() * scale[:, None]
    return SampledGram(rows, scale)


def sketch_matrix_for_regression(A, k, seed, gram_mode=EXACT, scores=None):
    """Leverage-score priority sample of ``A`` plus Gram information.

    ``gram_mode="exact"`` stores ``A^T A``; ``"single"`` stores the sampled
    rows reweighted by ``1/sqrt(min(1, l_i tau))`` so that
    ``(SA)^T (SA)`` estimates ``A^T A`` from the same sample.
    Precomputed leverage ``scores`` may be passed to skip recomputation.
    """
    if gram_mode not in (EXACT, SINGLE):
        raise ParameterError(f"unknown gram mode {gram_mode!r}")
    if scores is None:
        scores = leverage_scores(A)
    lev = scores.scores if isinstance(scores, LeverageScores) else np.asarray(scores)
    sample = priority_sample(A, k, seed, weights=lev)
    sampled = lev[sample.indices].copy()
    if gram_mode == EXACT:
        gram = ExactGram(exact_product(A, A))
    else:
        gram = _sampled_gram(sample, sampled, sample.tau)
    return RegressionSketch(sample, sampled, gram)


def _as_column(b):
    if isinstance(b, SparseMatrix):
        if b.n_cols != 1:
            raise DimensionError(f"expected a single-column matrix, got {b.n_cols} columns")
        return b
    arr = np.asarray(b, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {arr.shape}")
    return SparseMatrix.from_dense(arr[:, None])


def _as_vector(b):
    if isinstance(b, SparseMatrix):
        return _as_column(b).to_dense()[:, 0]
    arr = np.asarray(b, dtype=np.float64)
    return arr[:, 0] if arr.ndim == 2 and arr.shape[1] == 1 else arr


def sketch_vector_for_regression(b, k, seed):
    """Priority sample of the entries of ``b`` by squared magnitude."""
    return priority_sample(_as_column(b), k, seed)


def estimate_rhs(RA, Sb):
    """Unbiased estimate of ``A^T b``:
    ``W = sum_{i in T} A_i b_i / min(1, l_i tau_A, b_i^2 tau_b)``."""
    SA = RA.sample
    if SA.seed != Sb.seed:
        raise CoordinationError(f"sketches use different seeds ({SA.seed} vs {Sb.seed})")
    if SA.kind != PRIORITY or Sb.kind != PRIORITY:
        raise CoordinationError("regression needs two priority sketches")
    if Sb.weight_mode != SQUARED_NORM or SA.weight_mode != LEVERAGE:
        raise CoordinationError("expected a leverage sketch of A and a magnitude sketch of b")
    if Sb.n_cols != 1:
        raise DimensionError("the response sketch must have a single column")
    if SA.n_rows and Sb.n_rows and SA.n_rows != Sb.n_rows:
        raise CoordinationError("sketched matrices have different row counts")
    common, pos_a, pos_b = intersect(SA, Sb)
    b_sq = row_sq_norms(Sb.rows)
    p = inclusion_probabilities(RA.sampled_scores[pos_a], SA.tau, b_sq[pos_b], Sb.tau)
    a_rows = SA.rows.take_rows(pos_a).to_dense()
    b_vals = Sb.rows.take_rows(pos_b).to_dense()[:, 0]
    return a_rows.T @ (b_vals / p)


def solve_regression(RA, Sb):
    """Approximate least-squares solution ``G^+ W`` from coordinated sketches,
    where ``W`` is :func:`estimate_rhs` and ``G`` the stored exact or
    sampled Gram matrix."""
    W = estimate_rhs(RA, Sb)
    ginv, _ = pinv_psd(RA.gram.gram())
    return ginv @ W


def least_squares(A, b):
    """Exact minimizer ``x* = (A^T A)^+ A^T b``."""
    bcol = _as_column(b)
    if bcol.n_rows != A.n_rows:
        raise DimensionError("b must have one entry per row of A")
    ginv, _ = pinv_psd(exact_product(A, A))
    return ginv @ exact_product(A, bcol)[:, 0]


def regression_residual(A, b, x):
    """``|A x - b|_2^2``."""
    bv = _as_vector(b)
    x = np.asarray(x, dtype=np.float64).ravel()
    if bv.shape != (A.n_rows,) or x.shape != (A.n_cols,):
        raise DimensionError(
            f"incompatible shapes: A {A.shape}, b {bv.shape}, x {x.shape}"
        )
    r = A.to_scipy() @ x - bv
    return float(r @ r)


def regression_items(RA, Sb, counting="auto"):
    """Storage items of a regression sketch pair (samples, scores, Gram)."""
    return (
        sketch_items(RA.sample, counting)
        + RA.sampled_scores.size
        + RA.gram.items()
        + sketch_items(Sb, counting)
    )
