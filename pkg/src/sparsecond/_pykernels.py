"""Pure-numpy implementations of the hot kernels.

Same signatures and return conventions as the compiled ``_ckernels``
module; selected automatically when the extension is unavailable.
Row sums are accumulated in stored-index order so the two backends agree
bitwise on matvec products.
"""

import numpy as np

NAME = "python"

# status codes shared with the compiled backend
OK = 0
STRUCTURAL = 1
NUMERICAL = 2


def csr_matvec(indptr, indices, data, x):
    nrows = indptr.shape[0] - 1
    y = np.zeros(nrows)
    if nrows == 0 or data.shape[0] == 0:
        return y
    lengths = np.diff(indptr)
    start = indptr[:-1]
    # sweep the k-th stored entry of every row at once: sequential per row
    for k in range(int(lengths.max())):
        rows = np.nonzero(lengths > k)[0]
        pos = start[rows] + k
        y[rows] += data[pos] * x[indices[pos]]
    return y


def csr_rmatvec(indptr, indices, data, ncols, x):
    y = np.zeros(ncols)
    if data.shape[0] == 0:
        return y
    rows = np.repeat(np.arange(indptr.shape[0] - 1), np.diff(indptr))
    # np.add.at is unbuffered and applies updates in array order
    np.add.at(y, indices, data * x[rows])
    return y


def lower_unit_solve(indptr, indices, data, b):
    n = b.shape[0]
    x = np.array(b, dtype=float)
    for i in range(n):
        lo, hi = indptr[i], indptr[i + 1]
        if hi > lo:
            x[i] -= np.dot(data[lo:hi], x[indices[lo:hi]])
    return x


def upper_solve(indptr, indices, data, b):
    n = b.shape[0]
    x = np.array(b, dtype=float)
    for i in range(n - 1, -1, -1):
        lo, hi = indptr[i], indptr[i + 1]
        # diagonal is the first stored entry of an upper-triangular row
        if hi > lo + 1:
            x[i] -= np.dot(data[lo + 1:hi], x[indices[lo + 1:hi]])
        x[i] /= data[lo]
    return x


def upper_transpose_solve(indptr, indices, data, b):
    n = b.shape[0]
    x = np.array(b, dtype=float)
    for i in range(n):
        lo, hi = indptr[i], indptr[i + 1]
        x[i] /= data[lo]
        if hi > lo + 1:
            x[indices[lo + 1:hi]] -= data[lo + 1:hi] * x[i]
    return x


def lower_unit_transpose_solve(indptr, indices, data, b):
    n = b.shape[0]
    x = np.array(b, dtype=float)
    for i in range(n - 1, -1, -1):
        lo, hi = indptr[i], indptr[i + 1]
        if hi > lo:
            x[indices[lo:hi]] -= data[lo:hi] * x[i]
    return x


def lu_factor(n, colptr, rowind, vals, pivot_tol):
    """Left-looking LU with partial pivoting on a CSC matrix.

    Returns ``(status, col, pivot, Lp, Li, Lx, Up, Ui, Ux, prow)``. ``Li``
    holds original row indices, ``Ui`` holds elimination-step indices and
    ``prow[k]`` is the original row chosen as pivot at step ``k``.
    """
    x = np.zeros(n)
    structural = np.zeros(n, dtype=bool)
    pinv = np.full(n, -1, dtype=np.int64)
    prow = np.full(n, -1, dtype=np.int64)
    Lcols = []
    Ucols = []
    for k in range(n):
        lo, hi = colptr[k], colptr[k + 1]
        rk = rowind[lo:hi]
        x[rk] = vals[lo:hi]
        structural[rk] = True
        colmax = np.max(np.abs(vals[lo:hi])) if hi > lo else 0.0

        ui = []
        ux = []
        for j in range(k):
            p = prow[j]
            v = x[p]
            if v != 0.0:
                ui.append(j)
                ux.append(v)
                li, lx = Lcols[j]
                if li.shape[0]:
                    x[li] -= lx * v
                    structural[li] = True

        cand = np.nonzero((pinv < 0) & structural)[0]
        if cand.shape[0] == 0:
            return (STRUCTURAL, k, 0.0) + _empty_factors(n)
        mags = np.abs(x[cand])
        best = int(np.argmax(mags))
        pivot = x[cand[best]]
        if abs(pivot) == 0.0 or abs(pivot) < pivot_tol * colmax:
            return (NUMERICAL, k, float(abs(pivot))) + _empty_factors(n)
        p = int(cand[best])
        others = cand[(cand != p) & (x[cand] != 0.0)]
        Lcols.append((others, x[others] / pivot))
        ui.append(k)
        ux.append(pivot)
        Ucols.append((np.array(ui, dtype=np.int64), np.array(ux)))
        pinv[p] = k
        prow[k] = p

        touched = np.nonzero(structural)[0]
        x[touched] = 0.0
        structural[touched] = False

    Lp, Li, Lx = _pack(Lcols)
    Up, Ui, Ux = _pack(Ucols)
    return OK, -1, 0.0, Lp, Li, Lx, Up, Ui, Ux, prow


def _pack(cols):
    ptr = np.zeros(len(cols) + 1, dtype=np.int64)
    if cols:
        ptr[1:] = np.cumsum([c[0].shape[0] for c in cols])
        idx = np.concatenate([c[0] for c in cols]).astype(np.int64)
        val = np.concatenate([c[1] for c in cols]).astype(float)
    else:
        idx = np.zeros(0, dtype=np.int64)
        val = np.zeros(0)
    return ptr, idx, val


def _empty_factors(n):
    z = np.zeros(0, dtype=np.int64)
    return z, z, np.zeros(0), z, z, np.zeros(0), np.zeros(0, dtype=np.int64)


def ilu0(indptr, indices, data):
    """Zero-fill incomplete LU on a CSR pattern.

    Returns ``(status, row, values)`` where ``values`` holds the combined
    factors on the input pattern (strict lower part is L, the rest is U).
    """
    n = indptr.shape[0] - 1
    a = np.array(data, dtype=float)
    diag = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        lo, hi = indptr[i], indptr[i + 1]
        hit = np.nonzero(indices[lo:hi] == i)[0]
        if hit.shape[0]:
            diag[i] = lo + hit[0]
    if n and diag[0] < 0:
        return STRUCTURAL, 0, a
    pos = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        lo, hi = indptr[i], indptr[i + 1]
        if diag[i] < 0:
            return STRUCTURAL, i, a
        pos[indices[lo:hi]] = np.arange(lo, hi)
        for kk in range(lo, hi):
            k = indices[kk]
            if k >= i:
                break
            a[kk] /= a[diag[k]]
            klo, khi = diag[k] + 1, indptr[k + 1]
            cols = indices[klo:khi]
            tgt = pos[cols]
            keep = tgt >= 0
            a[tgt[keep]] -= a[kk] * a[klo:khi][keep]
        pos[indices[lo:hi]] = -1
        if a[diag[i]] == 0.0:
            return NUMERICAL, i, a
    return OK, -1, a
