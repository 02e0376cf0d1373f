import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from sparsecond import SparseMatrix, ScalingDiagonal
from sparsecond.exceptions import DimensionMismatch, ZeroColumn, ZeroRow
from sparsecond.sparse import (column_norms, column_scale, inf_norm, matvec, one_norm,
                               row_norms, row_scale, transpose_matvec, two_norm,
                               unscale_solution)

finite = st.floats(-1e6, 1e6, allow_nan=False)


@st.composite
def dense_sparse(draw, max_n=8, square=False):
    n = draw(st.integers(1, max_n))
    m = n if square else draw(st.integers(1, max_n))
    a = draw(hnp.arrays(np.float64, (n, m), elements=finite))
    mask = draw(hnp.arrays(np.bool_, (n, m)))
    return a * mask


def test_from_coo_sums_duplicates():
    A = SparseMatrix.from_coo(2, 2, [1, 0, 1, 1], [1, 0, 1, 0], [1.0, 2.0, 3.0, 5.0])
    assert A.nnz == 3
    np.testing.assert_array_equal(A.to_dense(), [[2.0, 0.0], [5.0, 4.0]])


def test_invariants_rejected():
    with pytest.raises(ValueError):
        SparseMatrix(2, 2, [0, 2, 1], [0, 1], [1.0, 1.0])
    with pytest.raises(ValueError):
        SparseMatrix(1, 2, [0, 2], [1, 0], [1.0, 1.0])
    with pytest.raises(ValueError):
        SparseMatrix(1, 2, [0, 1], [2], [1.0])
    with pytest.raises(ValueError):
        SparseMatrix(1, 2, [1, 1], [], [])


def test_explicit_zeros_tolerated():
    A = SparseMatrix(2, 2, [0, 2, 3], [0, 1, 1], [1.0, 0.0, 2.0])
    assert A.nnz == 3
    np.testing.assert_array_equal(matvec(A, [1.0, 1.0]), [1.0, 2.0])


def test_immutable():
    A = SparseMatrix.identity(3)
    with pytest.raises(ValueError):
        A.values[0] = 2.0


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        matvec(SparseMatrix.identity(3), np.ones(2))
    with pytest.raises(DimensionMismatch):
        transpose_matvec(SparseMatrix.identity(3), np.ones(4))


def test_identity_products():
    x = np.array([1.5, -2.0, 3.0])
    np.testing.assert_array_equal(matvec(SparseMatrix.identity(3), x), x)


def test_column_scale_example():
    A = SparseMatrix.from_dense([[3.0, 0.0], [4.0, 2.0]])
    As, D = column_scale(A)
    np.testing.assert_allclose(D.factors, [5.0, 2.0])
    np.testing.assert_allclose(column_norms(As), [1.0, 1.0])


def test_zero_column_and_row():
    A = SparseMatrix.from_dense([[1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(ZeroColumn) as e:
        column_scale(A)
    assert e.value.index == 1
    with pytest.raises(ZeroRow) as e:
        row_scale(A.transpose(), np.ones(2))
    assert e.value.index == 1


def test_scaling_diagonal_positive():
    with pytest.raises(ValueError):
        ScalingDiagonal(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        ScalingDiagonal(np.array([1.0, math.inf]))


def test_norms_overflow_safe():
    v = np.array([1e200, 1e200])
    assert two_norm(v) == pytest.approx(math.sqrt(2) * 1e200)
    assert two_norm(np.array([1e-200, 1e-200])) == pytest.approx(math.sqrt(2) * 1e-200)
    A = SparseMatrix.from_dense([[1e200, 0.0], [1e200, 3.0]])
    np.testing.assert_allclose(column_norms(A), [math.sqrt(2) * 1e200, 3.0])
    assert inf_norm(np.array([-3.0, 2.0])) == 3.0
    assert one_norm(np.array([-3.0, 2.0])) == 5.0
    assert two_norm(np.array([])) == 0.0


@settings(max_examples=60, deadline=None)
@given(dense_sparse())
def test_matvec_matches_dense(a):
    A = SparseMatrix.from_dense(a)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(a.shape[1])
    y = rng.standard_normal(a.shape[0])
    scale = max(1.0, np.abs(a).max())
    np.testing.assert_allclose(matvec(A, x), a @ x, atol=1e-9 * scale * a.shape[1])
    np.testing.assert_allclose(transpose_matvec(A, y), a.T @ y, atol=1e-9 * scale * a.shape[0])


@settings(max_examples=60, deadline=None)
@given(dense_sparse())
def test_csr_invariants_and_round_trip(a):
    A = SparseMatrix.from_dense(a)
    ptr = A.row_offsets
    assert ptr[0] == 0 and ptr[-1] == A.nnz and np.all(np.diff(ptr) >= 0)
    for i in range(A.nrows):
        c = A.col_indices[ptr[i]:ptr[i + 1]]
        assert np.all(np.diff(c) > 0) and np.all(c < A.ncols)
    np.testing.assert_array_equal(A.to_dense(), a)
    assert A.transpose().transpose() == A


@settings(max_examples=60, deadline=None)
@given(dense_sparse(square=True), st.integers(0, 2 ** 31))
def test_column_scaling_composition(a, seed):
    a = a + np.eye(a.shape[0])
    A = SparseMatrix.from_dense(a)
    As, D = column_scale(A)
    np.testing.assert_allclose(column_norms(As), 1.0, rtol=1e-14)
    x = np.random.default_rng(seed).standard_normal(a.shape[0])
    # (A D^-1)(D x) == A x
    np.testing.assert_allclose(matvec(As, D.factors * x), matvec(A, x),
                               rtol=1e-12, atol=1e-12 * np.abs(a).max() * np.abs(x).max() * a.shape[0])
    np.testing.assert_allclose(unscale_solution(D.factors * x, D), x, rtol=1e-15)


@settings(max_examples=60, deadline=None)
@given(dense_sparse(square=True))
def test_row_scaling_unit_rows(a):
    a = a + np.eye(a.shape[0])
    A = SparseMatrix.from_dense(a)
    b = np.ones(a.shape[0])
    As, bs = row_scale(A, b)
    np.testing.assert_allclose(row_norms(As), 1.0, rtol=1e-14)
    np.testing.assert_allclose(bs * row_norms(A), b, rtol=1e-14)
