# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: CSR products, triangular solves, LU and ILU(0).

Every routine mirrors the operation order of ``_pykernels`` so that the two
backends are interchangeable.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.stdlib cimport malloc, realloc, free

cnp.import_array()

NAME = "cython"

cdef enum:
    C_OK = 0
    C_STRUCTURAL = 1
    C_NUMERICAL = 2

OK = C_OK
STRUCTURAL = C_STRUCTURAL
NUMERICAL = C_NUMERICAL

ctypedef cnp.int64_t idx_t


def csr_matvec(const idx_t[::1] indptr, const idx_t[::1] indices,
               const double[::1] data, const double[::1] x):
    cdef Py_ssize_t nrows = indptr.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef double s
    y = np.zeros(nrows)
    cdef double[::1] yv = y
    with nogil:
        for i in range(nrows):
            s = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                s = s + data[k] * x[indices[k]]
            yv[i] = s
    return y


def csr_rmatvec(const idx_t[::1] indptr, const idx_t[::1] indices,
                const double[::1] data, Py_ssize_t ncols, const double[::1] x):
    cdef Py_ssize_t nrows = indptr.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef double xi
    y = np.zeros(ncols)
    cdef double[::1] yv = y
    with nogil:
        for i in range(nrows):
            xi = x[i]
            for k in range(indptr[i], indptr[i + 1]):
                yv[indices[k]] = yv[indices[k]] + data[k] * xi
    return y


def lower_unit_solve(const idx_t[::1] indptr, const idx_t[::1] indices,
                     const double[::1] data, const double[::1] b):
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t i, k
    cdef double s
    x = np.array(b, dtype=np.float64)
    cdef double[::1] xv = x
    with nogil:
        for i in range(n):
            s = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                s = s + data[k] * xv[indices[k]]
            xv[i] = xv[i] - s
    return x


def upper_solve(const idx_t[::1] indptr, const idx_t[::1] indices,
                const double[::1] data, const double[::1] b):
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t i, k, lo
    cdef double s
    x = np.array(b, dtype=np.float64)
    cdef double[::1] xv = x
    with nogil:
        for i in range(n - 1, -1, -1):
            lo = indptr[i]
            s = 0.0
            for k in range(lo + 1, indptr[i + 1]):
                s = s + data[k] * xv[indices[k]]
            xv[i] = (xv[i] - s) / data[lo]
    return x


def upper_transpose_solve(const idx_t[::1] indptr, const idx_t[::1] indices,
                          const double[::1] data, const double[::1] b):
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t i, k, lo
    cdef double xi
    x = np.array(b, dtype=np.float64)
    cdef double[::1] xv = x
    with nogil:
        for i in range(n):
            lo = indptr[i]
            xi = xv[i] / data[lo]
            xv[i] = xi
            for k in range(lo + 1, indptr[i + 1]):
                xv[indices[k]] = xv[indices[k]] - data[k] * xi
    return x


def lower_unit_transpose_solve(const idx_t[::1] indptr, const idx_t[::1] indices,
                               const double[::1] data, const double[::1] b):
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t i, k
    cdef double xi
    x = np.array(b, dtype=np.float64)
    cdef double[::1] xv = x
    with nogil:
        for i in range(n - 1, -1, -1):
            xi = xv[i]
            for k in range(indptr[i], indptr[i + 1]):
                xv[indices[k]] = xv[indices[k]] - data[k] * xi
    return x


cdef struct Buf:
    idx_t *idx
    double *val
    Py_ssize_t size
    Py_ssize_t cap


cdef int buf_init(Buf *b, Py_ssize_t cap) nogil:
    if cap < 16:
        cap = 16
    b.idx = <idx_t *> malloc(cap * sizeof(idx_t))
    b.val = <double *> malloc(cap * sizeof(double))
    b.size = 0
    b.cap = cap
    return 0 if (b.idx != NULL and b.val != NULL) else -1


cdef int buf_push(Buf *b, idx_t i, double v) nogil:
    cdef idx_t *ni
    cdef double *nv
    if b.size == b.cap:
        ni = <idx_t *> realloc(b.idx, 2 * b.cap * sizeof(idx_t))
        if ni == NULL:
            return -1
        b.idx = ni
        nv = <double *> realloc(b.val, 2 * b.cap * sizeof(double))
        if nv == NULL:
            return -1
        b.val = nv
        b.cap = 2 * b.cap
    b.idx[b.size] = i
    b.val[b.size] = v
    b.size += 1
    return 0


cdef void buf_free(Buf *b) noexcept nogil:
    free(b.idx)
    free(b.val)


cdef tuple buf_export(Buf *b):
    idx = np.empty(b.size, dtype=np.int64)
    val = np.empty(b.size, dtype=np.float64)
    cdef idx_t[::1] iv = idx
    cdef double[::1] vv = val
    cdef Py_ssize_t k
    for k in range(b.size):
        iv[k] = b.idx[k]
        vv[k] = b.val[k]
    return idx, val


def _empty_factors(n):
    z = np.zeros(0, dtype=np.int64)
    return z, z, np.zeros(0), z, z, np.zeros(0), np.zeros(0, dtype=np.int64)


def lu_factor(Py_ssize_t n, const idx_t[::1] colptr, const idx_t[::1] rowind,
              const double[::1] vals, double pivot_tol):
    """Left-looking LU with partial pivoting on a CSC matrix.

    Returns ``(status, col, pivot, Lp, Li, Lx, Up, Ui, Ux, prow)``; see the
    Python backend for the layout.
    """
    x_arr = np.zeros(n)
    mark_arr = np.zeros(n, dtype=np.int8)
    pinv_arr = np.full(n, -1, dtype=np.int64)
    prow_arr = np.full(n, -1, dtype=np.int64)
    Lp_arr = np.zeros(n + 1, dtype=np.int64)
    Up_arr = np.zeros(n + 1, dtype=np.int64)
    cdef double[::1] x = x_arr
    cdef cnp.int8_t[::1] mark = mark_arr
    cdef idx_t[::1] pinv = pinv_arr
    cdef idx_t[::1] prow = prow_arr
    cdef idx_t[::1] Lp = Lp_arr
    cdef idx_t[::1] Up = Up_arr
    cdef Buf L, U
    cdef Py_ssize_t k, j, i, q, p, best
    cdef double v, colmax, pivot, mag, bestmag
    cdef int status = C_OK
    cdef Py_ssize_t bad_col = -1
    cdef double bad_piv = 0.0
    cdef int alloc_err = 0

    if buf_init(&L, 4 * (vals.shape[0] + n)) < 0 or buf_init(&U, 4 * (vals.shape[0] + n)) < 0:
        buf_free(&L)
        buf_free(&U)
        raise MemoryError()
    with nogil:
        for k in range(n):
            colmax = 0.0
            for q in range(colptr[k], colptr[k + 1]):
                x[rowind[q]] = vals[q]
                mark[rowind[q]] = 1
                if fabs(vals[q]) > colmax:
                    colmax = fabs(vals[q])
            for j in range(k):
                p = prow[j]
                v = x[p]
                if v != 0.0:
                    if buf_push(&U, j, v) < 0:
                        alloc_err = 1
                        break
                    for q in range(Lp[j], Lp[j + 1]):
                        i = L.idx[q]
                        x[i] = x[i] - L.val[q] * v
                        mark[i] = 1
            if alloc_err:
                break
            best = -1
            bestmag = -1.0
            for i in range(n):
                if pinv[i] < 0 and mark[i]:
                    mag = fabs(x[i])
                    if mag > bestmag:
                        bestmag = mag
                        best = i
            if best < 0:
                status = C_STRUCTURAL
                bad_col = k
                break
            pivot = x[best]
            if bestmag == 0.0 or bestmag < pivot_tol * colmax:
                status = C_NUMERICAL
                bad_col = k
                bad_piv = bestmag
                break
            for i in range(n):
                if mark[i]:
                    if pinv[i] < 0 and i != best and x[i] != 0.0:
                        if buf_push(&L, i, x[i] / pivot) < 0:
                            alloc_err = 1
                            break
                    x[i] = 0.0
                    mark[i] = 0
            if alloc_err:
                break
            if buf_push(&U, k, pivot) < 0:
                alloc_err = 1
                break
            Lp[k + 1] = L.size
            Up[k + 1] = U.size
            pinv[best] = k
            prow[k] = best

    if alloc_err:
        buf_free(&L)
        buf_free(&U)
        raise MemoryError()
    if status != OK:
        buf_free(&L)
        buf_free(&U)
        return (status, bad_col, bad_piv) + _empty_factors(n)
    Li, Lx = buf_export(&L)
    Ui, Ux = buf_export(&U)
    buf_free(&L)
    buf_free(&U)
    return OK, -1, 0.0, Lp_arr, Li, Lx, Up_arr, Ui, Ux, prow_arr


def ilu0(const idx_t[::1] indptr, const idx_t[::1] indices, const double[::1] data):
    """Zero-fill incomplete LU on a CSR pattern; returns ``(status, row, values)``."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    a_arr = np.array(data, dtype=np.float64)
    diag_arr = np.full(n, -1, dtype=np.int64)
    pos_arr = np.full(n, -1, dtype=np.int64)
    cdef double[::1] a = a_arr
    cdef idx_t[::1] diag = diag_arr
    cdef idx_t[::1] pos = pos_arr
    cdef Py_ssize_t i, kk, k, q, t
    cdef double lik
    cdef int status = C_OK
    cdef Py_ssize_t bad = -1
    with nogil:
        for i in range(n):
            for q in range(indptr[i], indptr[i + 1]):
                if indices[q] == i:
                    diag[i] = q
                    break
        for i in range(n):
            if diag[i] < 0:
                status = C_STRUCTURAL
                bad = i
                break
            for q in range(indptr[i], indptr[i + 1]):
                pos[indices[q]] = q
            for kk in range(indptr[i], indptr[i + 1]):
                k = indices[kk]
                if k >= i:
                    break
                lik = a[kk] / a[diag[k]]
                a[kk] = lik
                for q in range(diag[k] + 1, indptr[k + 1]):
                    t = pos[indices[q]]
                    if t >= 0:
                        a[t] = a[t] - lik * a[q]
            for q in range(indptr[i], indptr[i + 1]):
                pos[indices[q]] = -1
            if a[diag[i]] == 0.0:
                status = C_NUMERICAL
                bad = i
                break
    return status, bad, a_arr
