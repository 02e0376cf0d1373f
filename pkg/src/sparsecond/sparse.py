"""Compressed sparse row storage, products, norms and diagonal scalings.

CSR is the only storage format. Column-oriented work (``transpose_matvec``,
``column_norms``) traverses the rows directly instead of keeping a second
copy of the matrix.
"""

from dataclasses import dataclass

import numpy as np

from . import _backend
from .exceptions import DimensionMismatch, ZeroColumn, ZeroRow


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    if a.flags.writeable:
        a = a.copy()
        a.flags.writeable = False
    return a


class SparseMatrix:
    """A real matrix in CSR form.

    Parameters
    ----------
    nrows, ncols : int
        Shape of the matrix.
    row_offsets : (nrows + 1,) array_like of int
        ``row_offsets[i]:row_offsets[i+1]`` delimits row ``i``.
    col_indices : (nnz,) array_like of int
        Column of every stored entry, strictly increasing within a row.
    values : (nnz,) array_like of float
        Stored values. Explicit zeros are allowed.

    The arrays are copied and made read-only, so instances are immutable.
    Use :meth:`from_coo` to build from unsorted triplets with duplicates.
    """

    __slots__ = ("nrows", "ncols", "row_offsets", "col_indices", "values")

    def __init__(self, nrows, ncols, row_offsets, col_indices, values, check=True):
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.row_offsets = _frozen(row_offsets, np.int64)
        self.col_indices = _frozen(col_indices, np.int64)
        self.values = _frozen(values, np.float64)
        if check:
            self._validate()

    def _validate(self):
        ptr, idx = self.row_offsets, self.col_indices
        if self.nrows < 0 or self.ncols < 0:
            raise ValueError("negative dimension")
        if ptr.shape != (self.nrows + 1,):
            raise ValueError("row_offsets must have length nrows + 1")
        if ptr[0] != 0 or ptr[-1] != idx.shape[0]:
            raise ValueError("row_offsets must start at 0 and end at nnz")
        if np.any(np.diff(ptr) < 0):
            raise ValueError("row_offsets must be nondecreasing")
        if idx.shape != self.values.shape:
            raise ValueError("col_indices and values differ in length")
        if idx.shape[0]:
            if idx.min() < 0 or idx.max() >= self.ncols:
                raise ValueError("column index out of range")
            steps = np.diff(idx)
            # a decrease is only allowed where a new row starts
            starts = np.zeros(idx.shape[0], dtype=bool)
            starts[ptr[1:-1][ptr[1:-1] < idx.shape[0]]] = True
            if np.any((steps <= 0) & ~starts[1:]):
                raise ValueError("column indices must be strictly increasing within a row")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_coo(cls, nrows, ncols, rows, cols, vals):
        """Build from triplets; duplicate ``(row, col)`` pairs are summed."""
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.float64).ravel()
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("rows, cols and vals must have equal length")
        if rows.shape[0]:
            if rows.min() < 0 or rows.max() >= nrows or cols.min() < 0 or cols.max() >= ncols:
                raise ValueError("triplet index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.shape[0]:
            new = np.ones(rows.shape[0], dtype=bool)
            new[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            heads = np.nonzero(new)[0]
            vals = np.add.reduceat(vals, heads)
            rows, cols = rows[heads], cols[heads]
        ptr = np.zeros(nrows + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=nrows), out=ptr[1:])
        return cls(nrows, ncols, ptr, cols, vals, check=False)

    @classmethod
    def from_dense(cls, a, drop_zeros=True):
        a = np.atleast_2d(np.asarray(a, dtype=np.float64))
        if drop_zeros:
            r, c = np.nonzero(a)
        else:
            r, c = np.indices(a.shape).reshape(2, -1)
        return cls.from_coo(a.shape[0], a.shape[1], r, c, a[r, c])

    @classmethod
    def identity(cls, n):
        i = np.arange(n)
        return cls(n, n, np.arange(n + 1), i, np.ones(n), check=False)

    @classmethod
    def diag(cls, d):
        d = np.asarray(d, dtype=np.float64)
        n = d.shape[0]
        return cls(n, n, np.arange(n + 1), np.arange(n), d, check=False)

    # -- views --------------------------------------------------------------

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def nnz(self):
        return int(self.values.shape[0])

    def row_indices(self):
        """Row of every stored entry (expanded ``row_offsets``)."""
        return np.repeat(np.arange(self.nrows, dtype=np.int64), np.diff(self.row_offsets))

    def to_dense(self):
        a = np.zeros(self.shape)
        np.add.at(a, (self.row_indices(), self.col_indices), self.values)
        return a

    def transpose(self):
        """Explicit transpose, as a new CSR matrix."""
        return SparseMatrix.from_coo(self.ncols, self.nrows, self.col_indices,
                                     self.row_indices(), self.values)

    def diagonal(self):
        d = np.zeros(min(self.shape))
        r = self.row_indices()
        on = r == self.col_indices
        d[r[on]] = self.values[on]
        return d

    def scale_columns(self, factors):
        """Return ``A @ diag(factors)``."""
        return SparseMatrix(self.nrows, self.ncols, self.row_offsets, self.col_indices,
                            self.values * np.asarray(factors)[self.col_indices], check=False)

    def scale_rows(self, factors):
        """Return ``diag(factors) @ A``."""
        f = np.asarray(factors)[self.row_indices()]
        return SparseMatrix(self.nrows, self.ncols, self.row_offsets, self.col_indices,
                            self.values * f, check=False)

    def frobenius_norm(self):
        return two_norm(self.values)

    def __matmul__(self, v):
        return matvec(self, v)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self.shape == other.shape
                and np.array_equal(self.row_offsets, other.row_offsets)
                and np.array_equal(self.col_indices, other.col_indices)
                and self.values.tobytes() == other.values.tobytes())

    __hash__ = None

    def __repr__(self):
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"


@dataclass(frozen=True)
class ScalingDiagonal:
    """Positive diagonal scaling factors (``D_row`` or ``D_col``)."""

    factors: np.ndarray

    def __post_init__(self):
        f = _frozen(self.factors, np.float64)
        if f.ndim != 1 or not np.all(np.isfinite(f)) or np.any(f <= 0):
            raise ValueError("scaling factors must be positive and finite")
        object.__setattr__(self, "factors", f)

    def __len__(self):
        return self.factors.shape[0]


def _vec(v, n, what):
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != n:
        raise DimensionMismatch(f"{what}: expected length {n}, got {v.shape}")
    return v


def matvec(A, v):
    """``A @ v`` with each row summed in stored-index order."""
    v = _vec(v, A.ncols, "matvec")
    return _backend.kernels.csr_matvec(A.row_offsets, A.col_indices, A.values, v)


def transpose_matvec(A, v):
    """``A.T @ v`` without forming the transpose."""
    v = _vec(v, A.nrows, "transpose_matvec")
    return _backend.kernels.csr_rmatvec(A.row_offsets, A.col_indices, A.values, A.ncols, v)


def _group_two_norms(values, groups, ngroups):
    # overflow-safe: divide each group by its largest magnitude first
    a = np.abs(values)
    scale = np.zeros(ngroups)
    np.maximum.at(scale, groups, a)
    safe = np.where(scale > 0, scale, 1.0)
    ss = np.zeros(ngroups)
    np.add.at(ss, groups, (a / safe[groups]) ** 2)
    return scale * np.sqrt(ss)


def column_norms(A):
    """Euclidean norm of every column; empty columns give 0."""
    return _group_two_norms(A.values, A.col_indices, A.ncols)


def row_norms(A):
    return _group_two_norms(A.values, A.row_indices(), A.nrows)


def column_scale(A):
    """Right-scale ``A`` to unit column norms.

    Returns
    -------
    scaled : SparseMatrix
        ``A @ inv(D_col)``.
    D : ScalingDiagonal
        The column norms, needed by :func:`unscale_solution`.

    Raises
    ------
    ZeroColumn
        If some column is entirely zero (structurally singular).
    """
    norms = column_norms(A)
    zero = np.nonzero(norms == 0)[0]
    if zero.shape[0]:
        raise ZeroColumn(int(zero[0]))
    return A.scale_columns(1.0 / norms), ScalingDiagonal(norms)


def unscale_solution(y, D):
    """Recover ``x = inv(D_col) @ y`` from the column-scaled system."""
    y = _vec(y, len(D), "unscale_solution")
    return y / D.factors


def row_scale(A, b):
    """Left-scale ``A x = b`` to unit row norms; returns ``(D⁻¹A, D⁻¹b)``."""
    b = _vec(b, A.nrows, "row_scale")
    norms = row_norms(A)
    zero = np.nonzero(norms == 0)[0]
    if zero.shape[0]:
        raise ZeroRow(int(zero[0]))
    inv = 1.0 / norms
    return A.scale_rows(inv), b * inv


def two_norm(v):
    """Euclidean norm, safe against overflow and underflow of the squares."""
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.shape[0] == 0:
        return 0.0
    m = float(np.max(np.abs(v)))
    if m == 0.0 or not np.isfinite(m):
        return m
    w = v / m
    return m * float(np.sqrt(np.dot(w, w)))


def inf_norm(v):
    v = np.asarray(v, dtype=np.float64).ravel()
    return float(np.max(np.abs(v))) if v.shape[0] else 0.0


def one_norm(v):
    v = np.asarray(v, dtype=np.float64).ravel()
    return float(np.sum(np.abs(v)))
