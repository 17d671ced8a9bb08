# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled word-size modular kernels used by the multi-modular solver.

All moduli must be primes below 2**31 so that a product of two residues fits
in a signed 64-bit integer.
"""
import numpy as np
cimport numpy as cnp

ctypedef long long i64
ctypedef unsigned long long u64

BACKEND = "cython"


cdef inline i64 _inv(i64 a, i64 p) nogil:
    cdef i64 t = 0, newt = 1, r = p, newr = a, q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    if t < 0:
        t += p
    return t


cdef void _convolve(const i64[:] a, const i64[:] b, i64[:] out, Py_ssize_t n, i64 p) nogil:
    cdef Py_ssize_t k, i, lo, hi
    cdef Py_ssize_t la = a.shape[0], lb = b.shape[0]
    cdef u64 acc
    cdef int cnt
    for k in range(n + 1):
        acc = 0
        cnt = 0
        lo = k - lb + 1
        if lo < 0:
            lo = 0
        hi = k
        if hi > la - 1:
            hi = la - 1
        for i in range(lo, hi + 1):
            acc += <u64>((a[i] * b[k - i]) % p)
            cnt += 1
            if cnt == 1 << 30:
                acc %= <u64>p
                cnt = 0
        out[k] = <i64>(acc % <u64>p)


def convolve_mod(a, b, Py_ssize_t n, i64 p):
    """Truncated product of two residue sequences: coefficients 0..n mod p."""
    cdef cnp.ndarray[i64, ndim=1] aa = np.ascontiguousarray(a, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=1] bb = np.ascontiguousarray(b, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=1] out = np.zeros(n + 1, dtype=np.int64)
    _convolve(aa, bb, out, n, p)
    return out.tolist()


def monomial_matrix_mod(u, v, int dpol, Py_ssize_t nrows, i64 p):
    """Rows 0..nrows-1 of the matrix whose columns are the q-coefficients of u^i v^j.

    Columns follow graded order: degree k = 1..dpol, then i = k..0 (u^i v^(k-i)).
    """
    cdef Py_ssize_t n = nrows - 1
    cdef cnp.ndarray[i64, ndim=1] uu = np.zeros(nrows, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=1] vv = np.zeros(nrows, dtype=np.int64)
    cdef Py_ssize_t m = min(len(u), nrows)
    uu[:m] = np.asarray(u[:m], dtype=np.int64)
    m = min(len(v), nrows)
    vv[:m] = np.asarray(v[:m], dtype=np.int64)

    cdef cnp.ndarray[i64, ndim=2] upow = np.zeros((dpol + 1, nrows), dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=2] vpow = np.zeros((dpol + 1, nrows), dtype=np.int64)
    upow[0, 0] = 1
    vpow[0, 0] = 1
    cdef int i, j, k, col
    for i in range(1, dpol + 1):
        _convolve(upow[i - 1], uu, upow[i], n, p)
        _convolve(vpow[i - 1], vv, vpow[i], n, p)

    cdef int ncols = dpol * (dpol + 3) // 2
    cdef cnp.ndarray[i64, ndim=2] mat = np.zeros((nrows, ncols), dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=1] tmp = np.zeros(nrows, dtype=np.int64)
    col = 0
    for k in range(1, dpol + 1):
        for i in range(k, -1, -1):
            j = k - i
            if i == 0:
                mat[:, col] = vpow[j]
            elif j == 0:
                mat[:, col] = upow[i]
            else:
                _convolve(upow[i], vpow[j], tmp, n, p)
                mat[:, col] = tmp
            col += 1
    return mat


cdef Py_ssize_t _row_reduce(i64[:, :] m, i64 p, Py_ssize_t[:] pivots) nogil:
    cdef Py_ssize_t nr = m.shape[0], nc = m.shape[1]
    cdef Py_ssize_t r = 0, c, i, k, sel
    cdef i64 inv, f, x
    for c in range(nc):
        if r == nr:
            break
        sel = -1
        for i in range(r, nr):
            if m[i, c] != 0:
                sel = i
                break
        if sel < 0:
            continue
        if sel != r:
            for k in range(c, nc):
                x = m[r, k]
                m[r, k] = m[sel, k]
                m[sel, k] = x
        inv = _inv(m[r, c], p)
        for k in range(c, nc):
            m[r, k] = (m[r, k] * inv) % p
        for i in range(nr):
            if i == r:
                continue
            f = m[i, c]
            if f == 0:
                continue
            for k in range(c, nc):
                if m[r, k] != 0:
                    x = (m[i, k] - f * m[r, k]) % p
                    if x < 0:
                        x += p
                    m[i, k] = x
        pivots[r] = c
        r += 1
    return r


def row_reduce_mod(mat, i64 p):
    """Reduced row echelon form mod p.

    Pivot selection is deterministic: columns left to right, first usable row.
    Returns ``(rows, pivot_columns)`` where ``rows`` are the nonzero reduced rows.
    """
    cdef cnp.ndarray[i64, ndim=2] m = np.array(mat, dtype=np.int64) % p
    cdef cnp.ndarray[Py_ssize_t, ndim=1] piv = np.zeros(min(m.shape[0], m.shape[1]) + 1, dtype=np.intp)
    cdef Py_ssize_t rank = _row_reduce(m, p, piv)
    return m[:rank].tolist(), [int(c) for c in piv[:rank]]
