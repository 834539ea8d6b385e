"""Row-major sparse matrices and the exact-product oracle.

Dense matrices (the product estimates W, projected sketches) are plain
``float64`` NumPy arrays.
"""
import numpy as np
import scipy.sparse as sps

from . import _backend
from .errors import DimensionError

__all__ = ["SparseMatrix", "row_sq_norm", "row_sq_norms", "frob_sq_norm", "exact_product"]


def _readonly(a):
    a.setflags(write=False)
    return a


class SparseMatrix:
    """Immutable CSR matrix with sorted column indices and no stored zeros.

    Use the ``from_*`` constructors; they normalize their input (drop exact
    zeros, sort columns, and either sum or reject duplicates).
    """

    __slots__ = ("n_rows", "n_cols", "indptr", "indices", "data")

    def __init__(self, n_rows, n_cols, indptr, indices, data, *, check=True):
        n_rows = int(n_rows)
        n_cols = int(n_cols)
        if n_rows < 0 or n_cols < 1:
            raise DimensionError(f"invalid shape ({n_rows}, {n_cols})")
        indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        indices = np.ascontiguousarray(indices, dtype=np.int64)
        data = np.ascontiguousarray(data, dtype=np.float64)
        if check:
            _validate(n_rows, n_cols, indptr, indices, data)
        object.__setattr__(self, "n_rows", n_rows)
        object.__setattr__(self, "n_cols", n_cols)
        object.__setattr__(self, "indptr", _readonly(indptr))
        object.__setattr__(self, "indices", _readonly(indices))
        object.__setattr__(self, "data", _readonly(data))

    def __setattr__(self, name, value):
        raise AttributeError("SparseMatrix is immutable")

    def __reduce__(self):
        return (SparseMatrix, (self.n_rows, self.n_cols, self.indptr, self.indices, self.data))

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_dense(cls, array):
        a = np.asarray(array, dtype=np.float64)
        if a.ndim == 1:
            a = a[:, None]
        if a.ndim != 2:
            raise DimensionError(f"expected a 2-D array, got shape {a.shape}")
        rows, cols = np.nonzero(a)
        indptr = np.zeros(a.shape[0] + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=a.shape[0]), out=indptr[1:])
        return cls(a.shape[0], a.shape[1], indptr, cols, a[rows, cols], check=False)

    @classmethod
    def from_coo(cls, n_rows, n_cols, rows, cols, values):
        """Build from coordinate triplets; duplicates are summed, zeros dropped."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if not (rows.shape == cols.shape == values.shape):
            raise DimensionError("rows, cols and values must have equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= n_rows):
            raise DimensionError("row index out of bounds")
        if cols.size and (cols.min() < 0 or cols.max() >= n_cols):
            raise DimensionError("column index out of bounds")
        m = sps.coo_matrix((values, (rows, cols)), shape=(n_rows, n_cols)).tocsr()
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        return cls(n_rows, n_cols, m.indptr, m.indices, m.data, check=False)

    @classmethod
    def from_rows(cls, n_cols, rows):
        """Build from a list of rows, each an iterable of ``(col, value)``.

        Column order within a row may be arbitrary; repeated columns raise.
        """
        indptr = [0]
        cols, vals = [], []
        for r, row in enumerate(rows):
            pairs = sorted((int(c), float(v)) for c, v in row)
            for (c0, _), (c1, _) in zip(pairs, pairs[1:]):
                if c0 == c1:
                    raise ValueError(f"duplicate column {c0} in row {r}")
            for c, v in pairs:
                if not 0 <= c < n_cols:
                    raise DimensionError(f"column {c} out of range in row {r}")
                if v != 0.0:
                    cols.append(c)
                    vals.append(v)
            indptr.append(len(cols))
        return cls(len(indptr) - 1, n_cols, indptr, cols, vals, check=False)

    @classmethod
    def from_scipy(cls, m):
        m = sps.csr_matrix(m, dtype=np.float64, copy=True)
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        return cls(m.shape[0], m.shape[1], m.indptr, m.indices, m.data, check=False)

    @classmethod
    def zeros(cls, n_rows, n_cols):
        return cls(n_rows, n_cols, np.zeros(n_rows + 1), [], [], check=False)

    # -- accessors ----------------------------------------------------------

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self):
        return int(self.indptr[-1])

    def row_nnz(self):
        return np.diff(self.indptr)

    def row(self, i):
        """``(cols, values)`` of row ``i`` as read-only arrays."""
        i = _check_row(self, i)
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.data[lo:hi]

    def nonzero_rows(self):
        return np.flatnonzero(np.diff(self.indptr))

    def take_rows(self, rows):
        """Sub-matrix made of the given rows, in the given order."""
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size == 0:
            return SparseMatrix.zeros(0, self.n_cols)
        sub = self.to_scipy()[rows]
        return SparseMatrix(rows.size, self.n_cols, sub.indptr, sub.indices, sub.data, check=False)

    def to_dense(self):
        return self.to_scipy().toarray()

    def to_scipy(self):
        return sps.csr_matrix((self.data, self.indices, self.indptr), shape=self.shape)

    def transpose(self):
        return SparseMatrix.from_scipy(self.to_scipy().T)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.data, other.data)
        )

    __hash__ = None

    def __repr__(self):
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"


def _validate(n_rows, n_cols, indptr, indices, data):
    if indptr.shape != (n_rows + 1,) or indptr[0] != 0:
        raise DimensionError("indptr must have length n_rows + 1 and start at 0")
    if np.any(np.diff(indptr) < 0):
        raise DimensionError("indptr must be nondecreasing")
    if indices.shape != data.shape or indices.size != indptr[-1]:
        raise DimensionError("indices/data length must equal indptr[-1]")
    if indices.size:
        if indices.min() < 0 or indices.max() >= n_cols:
            raise DimensionError("column index out of range")
        step = np.diff(indices)
        # within a row columns must strictly increase; row starts reset
        starts = np.zeros(indices.size, dtype=bool)
        starts[indptr[:-1][np.diff(indptr) > 0]] = True
        if np.any((step <= 0) & ~starts[1:]):
            raise ValueError("column indices must be strictly increasing within each row")
    if np.any(data == 0.0):
        raise ValueError("stored values must be nonzero")
    if not np.all(np.isfinite(data)):
        raise ValueError("stored values must be finite")


def _check_row(A, i):
    i = int(i)
    if not 0 <= i < A.n_rows:
        raise IndexError(f"row index {i} out of range for {A.n_rows} rows")
    return i


def row_sq_norms(A):
    """Squared Euclidean norm of every row."""
    return _backend.kernels.row_sq_norms(A.indptr, A.data)


def row_sq_norm(A, i):
    _, vals = A.row(i)
    return float(np.dot(vals, vals))


def frob_sq_norm(A):
    return float(np.sum(row_sq_norms(A)))


def exact_product(A, B):
    """Dense ``A^T B`` accumulated as a sum of row outer products."""
    if A.n_rows != B.n_rows:
        raise DimensionError(f"row count mismatch: {A.n_rows} vs {B.n_rows}")
    rows = A.nonzero_rows()
    rows = rows[np.diff(B.indptr)[rows] > 0]
    return _backend.kernels.weighted_outer(
        A.indptr, A.indices, A.data, rows,
        B.indptr, B.indices, B.data, rows,
        np.ones(rows.size), A.n_cols, B.n_cols,
    )
