"""Pure NumPy implementations of the inner loops.

These mirror ``_ckernels.pyx`` function for function and are used when the
compiled extension is unavailable. Integer hashing is bit-identical between
the two backends; floating-point reductions may differ in the last ulp
because summation order differs.
"""
import numpy as np
import scipy.sparse as sps

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(GOLDEN)
_TWO_M53 = 2.0**-53
_TWO_M54 = 2.0**-54


def mix64(z):
    """SplitMix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def hash_units(seed, idx):
    idx = np.asarray(idx, dtype=np.int64)
    key = np.uint64(mix64(int(seed)))
    with np.errstate(over="ignore"):
        state = (idx.astype(np.uint64) + np.uint64(1)) * _GOLDEN + key
        bits = _mix64_array(state) >> np.uint64(11)
    out = bits.astype(np.float64) * _TWO_M53
    out[bits == 0] = _TWO_M54
    return out


def row_sq_norms(indptr, data):
    indptr = np.asarray(indptr, dtype=np.int64)
    sq = np.asarray(data, dtype=np.float64) ** 2
    out = np.zeros(len(indptr) - 1)
    nz = np.flatnonzero(np.diff(indptr))
    if nz.size:
        # segment starts of nonempty rows are strictly increasing, so
        # reduceat over them yields exactly one row each
        out[nz] = np.add.reduceat(sq, indptr[nz])
    return out


def select_priority(ranks, k):
    """Positions of the k smallest ranks (ties by position) and the threshold.

    Returns ``(positions, tau)`` with positions ascending. ``tau`` is the
    (k+1)-st smallest rank, or +inf when there are at most k ranks.
    """
    ranks = np.asarray(ranks, dtype=np.float64)
    n = ranks.size
    if n <= k:
        return np.arange(n, dtype=np.int64), np.inf
    tau = float(np.partition(ranks, k)[k])
    below = ranks < tau
    need = k - int(np.count_nonzero(below))
    if need > 0:
        ties = np.flatnonzero(ranks == tau)[:need]
        below[ties] = True
    return np.flatnonzero(below).astype(np.int64), tau


def _csr(indptr, indices, data, n_cols):
    n_rows = len(indptr) - 1
    return sps.csr_matrix(
        (np.asarray(data), np.asarray(indices), np.asarray(indptr)), shape=(n_rows, n_cols)
    )


def project_rows(kind, row_seeds, indptr, indices, data, n_cols):
    """Unscaled Pi @ A for a Gaussian (kind 0) or sign (kind 1) Pi.

    Row r of Pi is generated from ``row_seeds[r]``; the entry in column i
    uses hash indices (2i, 2i+1) for Box-Muller, or i for the sign.
    """
    indptr = np.asarray(indptr, dtype=np.int64)
    k = len(row_seeds)
    nz = np.flatnonzero(np.diff(indptr))
    out = np.zeros((k, n_cols))
    if nz.size == 0:
        return out
    sub = _csr(indptr, indices, data, n_cols)[nz]
    pi = np.empty((k, nz.size))
    for r, s in enumerate(row_seeds):
        if kind == 0:
            u1 = hash_units(s, 2 * nz)
            u2 = hash_units(s, 2 * nz + 1)
            pi[r] = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
        else:
            pi[r] = np.where(hash_units(s, nz) < 0.5, 1.0, -1.0)
    return np.asarray((sub.T @ pi.T).T)


def countsketch_apply(buckets, signs, indptr, indices, data, k, n_cols):
    indptr = np.asarray(indptr, dtype=np.int64)
    lengths = np.diff(indptr)
    row_of = np.repeat(np.arange(len(lengths)), lengths)
    out = np.zeros((k, n_cols))
    vals = np.asarray(data) * np.asarray(signs)[row_of]
    np.add.at(out, (np.asarray(buckets)[row_of], np.asarray(indices)), vals)
    return out


def weighted_outer(a_indptr, a_indices, a_data, pos_a,
                   b_indptr, b_indices, b_data, pos_b, scale, d, m):
    """sum_t scale[t] * A[pos_a[t]] (x) B[pos_b[t]] as a dense d x m array."""
    pos_a = np.asarray(pos_a, dtype=np.int64)
    if pos_a.size == 0:
        return np.zeros((d, m))
    a = _csr(a_indptr, a_indices, a_data, d)[pos_a]
    b = _csr(b_indptr, b_indices, b_data, m)[np.asarray(pos_b, dtype=np.int64)]
    a = sps.diags(np.asarray(scale, dtype=np.float64)) @ a
    return np.asarray((a.T @ b).toarray())


def intersect_sorted(a, b):
    """Common values of two strictly increasing arrays and their positions."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.size == 0 or b.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy(), empty.copy()
    pos = np.searchsorted(b, a)
    pos_clip = np.minimum(pos, b.size - 1)
    hit = b[pos_clip] == a
    pos_a = np.flatnonzero(hit).astype(np.int64)
    return a[hit], pos_a, pos_clip[hit].astype(np.int64)
