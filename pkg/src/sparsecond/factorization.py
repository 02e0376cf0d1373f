"""Sparse LU with partial pivoting and the triangular solves built on it.

The factorization is left-looking and column-by-column in the natural
ordering (no fill-reducing permutation). Fill-in is stored as it appears.
"""

from dataclasses import dataclass

import numpy as np

from . import _backend
from .exceptions import (DimensionMismatch, NumericallySingular, StructurallySingular,
                         ZeroPivot)
from .sparse import SparseMatrix, _vec

DEFAULT_PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class LUFactors:
    """Factors of ``P A = L U``.

    Attributes
    ----------
    L : SparseMatrix
        Strictly lower part of the unit lower factor; the unit diagonal is
        implicit and not stored.
    U : SparseMatrix
        Upper factor, diagonal stored first in every row.
    row_perm : ndarray of int
        ``(P A)[k] = A[row_perm[k]]``.
    pivot_min : float
        Smallest pivot magnitude encountered.
    """

    L: SparseMatrix
    U: SparseMatrix
    row_perm: np.ndarray
    pivot_min: float

    @property
    def n(self):
        return self.U.nrows

    def lower_dense(self):
        """Dense ``L`` including the unit diagonal."""
        return self.L.to_dense() + np.eye(self.n)

    def permutation_matrix(self):
        P = np.zeros((self.n, self.n))
        P[np.arange(self.n), self.row_perm] = 1.0
        return P


def _to_csc(A):
    # temporary column access for the left-looking sweep only
    t = A.transpose()
    return t.row_offsets, t.col_indices, t.values


def lu_factorize(A, pivot_tol=DEFAULT_PIVOT_TOL):
    """Factor a square sparse matrix as ``P A = L U``.

    At every step the entry of largest magnitude among the not-yet-pivoted
    rows is chosen, so every stored entry of ``L`` satisfies ``|l| <= 1``.

    Parameters
    ----------
    A : SparseMatrix
        Square matrix.
    pivot_tol : float
        The factorization fails when the best pivot of column ``k`` is
        smaller than ``pivot_tol * max|A[:, k]|``.

    Raises
    ------
    StructurallySingular
        No candidate row carries a structural nonzero in some column.
    NumericallySingular
        The best pivot is exactly zero or below the relative tolerance.
    """
    if A.nrows != A.ncols:
        raise DimensionMismatch(f"LU needs a square matrix, got {A.shape}")
    n = A.nrows
    colptr, rowind, vals = _to_csc(A)
    (status, col, piv, Lp, Li, Lx, Up, Ui, Ux,
     prow) = _backend.kernels.lu_factor(n, colptr, rowind, vals, float(pivot_tol))
    if status == _backend.kernels.STRUCTURAL:
        raise StructurallySingular(int(col))
    if status == _backend.kernels.NUMERICAL:
        raise NumericallySingular(int(col), float(piv))

    pinv = np.empty(n, dtype=np.int64)
    pinv[prow] = np.arange(n)
    lcols = np.repeat(np.arange(n, dtype=np.int64), np.diff(Lp))
    L = SparseMatrix.from_coo(n, n, pinv[Li], lcols, Lx)
    ucols = np.repeat(np.arange(n, dtype=np.int64), np.diff(Up))
    U = SparseMatrix.from_coo(n, n, Ui, ucols, Ux)
    pivots = np.abs(U.diagonal())
    return LUFactors(L, U, np.asarray(prow, dtype=np.int64),
                     float(pivots.min()) if n else np.inf)


def lu_solve(F, b):
    """Solve ``A x = b`` by forward and backward substitution."""
    b = _vec(b, F.n, "lu_solve")
    k = _backend.kernels
    y = k.lower_unit_solve(F.L.row_offsets, F.L.col_indices, F.L.values, b[F.row_perm])
    return k.upper_solve(F.U.row_offsets, F.U.col_indices, F.U.values, y)


def lu_transpose_solve(F, b):
    """Solve ``A.T s = b`` with the same factors.

    ``A.T = U.T L.T P``, so solve ``U.T w = b``, then ``L.T z = w`` and undo
    the row permutation.
    """
    b = _vec(b, F.n, "lu_transpose_solve")
    k = _backend.kernels
    w = k.upper_transpose_solve(F.U.row_offsets, F.U.col_indices, F.U.values, b)
    z = k.lower_unit_transpose_solve(F.L.row_offsets, F.L.col_indices, F.L.values, w)
    s = np.empty_like(z)
    s[F.row_perm] = z
    return s


def ilu0(A):
    """Zero fill-in incomplete LU, restricted to the sparsity pattern of ``A``.

    Returns an :class:`LUFactors` with the identity row permutation. Meant
    as a preconditioner only.

    Raises
    ------
    ZeroPivot
        A diagonal entry is missing from the pattern or became zero.
    """
    if A.nrows != A.ncols:
        raise DimensionMismatch(f"ILU(0) needs a square matrix, got {A.shape}")
    n = A.nrows
    status, row, vals = _backend.kernels.ilu0(A.row_offsets, A.col_indices, A.values)
    if status != _backend.kernels.OK:
        raise ZeroPivot(int(row))
    r = A.row_indices()
    c = A.col_indices
    low = c < r
    L = SparseMatrix.from_coo(n, n, r[low], c[low], vals[low])
    U = SparseMatrix.from_coo(n, n, r[~low], c[~low], vals[~low])
    pivots = np.abs(U.diagonal())
    return LUFactors(L, U, np.arange(n, dtype=np.int64),
                     float(pivots.min()) if n else np.inf)
