# cython: language_level=3
"""Compiled inner loops; see _pykernels for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY
from libc.stdint cimport uint64_t, int64_t
from libc.string cimport memcpy

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO_M53 = 1.1102230246251565e-16
cdef double TWO_M54 = 5.551115123125783e-17


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _unit(uint64_t key, uint64_t i) noexcept nogil:
    cdef uint64_t bits = _mix64(key + (i + 1) * GOLDEN) >> 11
    if bits == 0:
        return TWO_M54
    return <double>bits * TWO_M53


cdef inline double _sign(uint64_t key, uint64_t i) noexcept nogil:
    # +1 iff _unit(key, i) < 0.5, i.e. iff the top bit of the mixed word is clear;
    # computed without a branch since the outcome is a coin flip
    return 1.0 - 2.0 * <double>(_mix64(key + (i + 1) * GOLDEN) >> 63)


def mix64(z):
    return int(_mix64(<uint64_t>(int(z) & 0xFFFFFFFFFFFFFFFF)))


def hash_units(seed, idx):
    cdef uint64_t key = _mix64(<uint64_t>int(seed))
    cdef const int64_t[::1] ix = np.ascontiguousarray(idx, dtype=np.int64)
    cdef Py_ssize_t n = ix.shape[0], t
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for t in range(n):
            o[t] = _unit(key, <uint64_t>ix[t])
    return out


def row_sq_norms(indptr, data):
    cdef const int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const double[::1] dv = np.ascontiguousarray(data, dtype=np.float64)
    cdef Py_ssize_t n = ip.shape[0] - 1, i, p
    cdef double acc
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            acc = 0.0
            for p in range(ip[i], ip[i + 1]):
                acc += dv[p] * dv[p]
            o[i] = acc
    return out


cdef double _quickselect(double* a, Py_ssize_t n, Py_ssize_t kth) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = n - 1, i, j, mid
    cdef double pivot, tmp
    while lo < hi:
        mid = lo + (hi - lo) // 2
        # median of three
        if a[mid] < a[lo]:
            tmp = a[mid]; a[mid] = a[lo]; a[lo] = tmp
        if a[hi] < a[lo]:
            tmp = a[hi]; a[hi] = a[lo]; a[lo] = tmp
        if a[hi] < a[mid]:
            tmp = a[hi]; a[hi] = a[mid]; a[mid] = tmp
        pivot = a[mid]
        i = lo
        j = hi
        while i <= j:
            while a[i] < pivot:
                i += 1
            while a[j] > pivot:
                j -= 1
            if i <= j:
                tmp = a[i]; a[i] = a[j]; a[j] = tmp
                i += 1
                j -= 1
        if kth <= j:
            hi = j
        elif kth >= i:
            lo = i
        else:
            return a[kth]
    return a[kth]


def select_priority(ranks, Py_ssize_t k):
    cdef const double[::1] r = np.ascontiguousarray(ranks, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0], t, c = 0, need
    if n <= k:
        return np.arange(n, dtype=np.int64), float("inf")
    buf = np.array(r, dtype=np.float64, copy=True)
    cdef double[::1] b = buf
    cdef double tau
    with nogil:
        tau = _quickselect(&b[0], n, k)
        for t in range(n):
            if r[t] < tau:
                c += 1
    need = k - c
    out = np.empty(k, dtype=np.int64)
    cdef int64_t[::1] o = out
    c = 0
    with nogil:
        for t in range(n):
            if r[t] < tau:
                o[c] = t
                c += 1
            elif r[t] == tau and need > 0:
                o[c] = t
                c += 1
                need -= 1
    return out, tau


# rows of A handled per block in project_rows, sized so a block of Pi
# entries stays around 64k doubles
cdef Py_ssize_t _BLOCK_ENTRIES = 65536


def project_rows(int kind, row_seeds, indptr, indices, data, Py_ssize_t n_cols):
    cdef const int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const int64_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[::1] dv = np.ascontiguousarray(data, dtype=np.float64)
    cdef Py_ssize_t k = len(row_seeds), r, a, p, start, stop, m
    cdef uint64_t i
    keys_arr = np.empty(k, dtype=np.uint64)
    cdef uint64_t[::1] keys = keys_arr
    for r in range(k):
        keys[r] = _mix64(<uint64_t>int(row_seeds[r]))
    nz_arr = np.flatnonzero(np.diff(np.asarray(ip)))
    cdef const int64_t[::1] nz = nz_arr.astype(np.int64)
    cdef Py_ssize_t n_nz = nz.shape[0]
    # accumulate (Pi A)^T so the innermost loop runs over contiguous r
    out_t = np.zeros((n_cols, k), dtype=np.float64)
    cdef double[:, ::1] o = out_t
    cdef Py_ssize_t block = max(1, _BLOCK_ENTRIES // max(k, 1))
    cdef double[:, ::1] u1v, u2v, gv
    cdef double v
    cdef double* orow
    cdef double* grow
    for start in range(0, n_nz, block):
        stop = min(start + block, n_nz)
        m = stop - start
        u1 = np.empty((m, k), dtype=np.float64)
        u1v = u1
        if kind == 0:
            u2 = np.empty((m, k), dtype=np.float64)
            u2v = u2
            with nogil:
                for a in range(m):
                    i = <uint64_t>nz[start + a]
                    for r in range(k):
                        u1v[a, r] = _unit(keys[r], 2 * i)
                        u2v[a, r] = _unit(keys[r], 2 * i + 1)
            # same expression as the NumPy kernel, so Pi agrees bit for bit
            g = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
        else:
            with nogil:
                for a in range(m):
                    i = <uint64_t>nz[start + a]
                    for r in range(k):
                        u1v[a, r] = _sign(keys[r], i)
            g = u1
        gv = g
        with nogil:
            for a in range(m):
                i = <uint64_t>nz[start + a]
                grow = &gv[a, 0]
                for p in range(ip[i], ip[i + 1]):
                    v = dv[p]
                    orow = &o[ix[p], 0]
                    for r in range(k):
                        orow[r] += grow[r] * v
    return np.ascontiguousarray(out_t.T)


def countsketch_apply(buckets, signs, indptr, indices, data, Py_ssize_t k, Py_ssize_t n_cols):
    cdef const int64_t[::1] bk = np.ascontiguousarray(buckets, dtype=np.int64)
    cdef const double[::1] sg = np.ascontiguousarray(signs, dtype=np.float64)
    cdef const int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const int64_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[::1] dv = np.ascontiguousarray(data, dtype=np.float64)
    cdef Py_ssize_t n = ip.shape[0] - 1, i, p, row
    cdef double s
    out = np.zeros((k, n_cols), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(n):
            row = bk[i]
            s = sg[i]
            for p in range(ip[i], ip[i + 1]):
                o[row, ix[p]] += s * dv[p]
    return out


def weighted_outer(a_indptr, a_indices, a_data, pos_a,
                   b_indptr, b_indices, b_data, pos_b, scale,
                   Py_ssize_t d, Py_ssize_t m):
    cdef const int64_t[::1] aip = np.ascontiguousarray(a_indptr, dtype=np.int64)
    cdef const int64_t[::1] aix = np.ascontiguousarray(a_indices, dtype=np.int64)
    cdef const double[::1] adv = np.ascontiguousarray(a_data, dtype=np.float64)
    cdef const int64_t[::1] bip = np.ascontiguousarray(b_indptr, dtype=np.int64)
    cdef const int64_t[::1] bix = np.ascontiguousarray(b_indices, dtype=np.int64)
    cdef const double[::1] bdv = np.ascontiguousarray(b_data, dtype=np.float64)
    cdef const int64_t[::1] pa = np.ascontiguousarray(pos_a, dtype=np.int64)
    cdef const int64_t[::1] pb = np.ascontiguousarray(pos_b, dtype=np.int64)
    cdef const double[::1] sc = np.ascontiguousarray(scale, dtype=np.float64)
    cdef Py_ssize_t T = pa.shape[0], t, p, q, ia, ib
    cdef double av
    out = np.zeros((d, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for t in range(T):
            ia = pa[t]
            ib = pb[t]
            for p in range(aip[ia], aip[ia + 1]):
                av = adv[p] * sc[t]
                for q in range(bip[ib], bip[ib + 1]):
                    o[aix[p], bix[q]] += av * bdv[q]
    return out


def intersect_sorted(a, b):
    cdef const int64_t[::1] x = np.ascontiguousarray(a, dtype=np.int64)
    cdef const int64_t[::1] y = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t na = x.shape[0], nb = y.shape[0], i = 0, j = 0, c = 0
    cdef Py_ssize_t cap = na if na < nb else nb
    common = np.empty(cap, dtype=np.int64)
    pa = np.empty(cap, dtype=np.int64)
    pb = np.empty(cap, dtype=np.int64)
    cdef int64_t[::1] cv = common
    cdef int64_t[::1] av = pa
    cdef int64_t[::1] bv = pb
    with nogil:
        while i < na and j < nb:
            if x[i] < y[j]:
                i += 1
            elif x[i] > y[j]:
                j += 1
            else:
                cv[c] = x[i]
                av[c] = i
                bv[c] = j
                c += 1
                i += 1
                j += 1
    return common[:c].copy(), pa[:c].copy(), pb[:c].copy()
