import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparsecond import SparseMatrix
from sparsecond.error_analysis import verify_solution
from sparsecond.exceptions import DimensionMismatch, NumericallySingular, ZeroDiagonal
from sparsecond.solvers import (SolverSpec, bicgstab_kernel, gmres_kernel,
                                jacobi_preconditioner, solve)
from sparsecond.sparse import column_scale, matvec, unscale_solution

from _fixtures import constructed_svd, laplacian_2d, random_sparse, tridiag

ALL = [SolverSpec(kind=k, precond=p, scaling=s, tol=1e-10)
       for k in ("gmres", "bicgstab") for p in ("none", "jacobi", "ilu0")
       for s in ("none", "column", "row")] + [SolverSpec(scaling=s) for s in ("none", "column", "row")]


@pytest.mark.parametrize("spec", ALL, ids=lambda s: s.label)
def test_identity_any_spec(spec):
    b = np.array([1.0, -2.0, 0.5, 4.0])
    out = solve(SparseMatrix.identity(4), b, spec)
    assert out.converged
    if spec.kind == "gmres":
        # x is assembled from the normalized basis vector r / ||r||
        np.testing.assert_allclose(out.x, b, rtol=4.5e-16, atol=0)
        assert out.relative_residual <= 1e-15
    else:
        np.testing.assert_array_equal(out.x, b)
        assert out.relative_residual == 0.0


def test_diag_gmres_ten_iterations():
    A = SparseMatrix.diag(np.arange(1.0, 11.0))
    b = np.ones(10)
    out = solve(A, b, SolverSpec(kind="gmres", tol=1e-12))
    assert out.converged and out.iterations <= 10 and out.relative_residual <= 1e-12


def test_laplacian_gmres_jacobi_matches_direct():
    A = laplacian_2d(10)
    b = np.random.default_rng(0).uniform(-1, 1, 100)
    xd = solve(A, b).x
    xg = solve(A, b, SolverSpec(kind="gmres", precond="jacobi", tol=1e-12)).x
    assert np.linalg.norm(xg - xd) <= 1e-8 * np.linalg.norm(xd)


def test_jacobi_factors():
    np.testing.assert_array_equal(jacobi_preconditioner(SparseMatrix.identity(3)).factors, 1.0)
    np.testing.assert_array_equal(jacobi_preconditioner(SparseMatrix.diag([4.0])).factors, [4.0])
    np.testing.assert_array_equal(jacobi_preconditioner(SparseMatrix.diag([-4.0])).factors, [4.0])
    with pytest.raises(ZeroDiagonal) as e:
        jacobi_preconditioner(SparseMatrix.from_dense([[1.0, 1.0], [1.0, 0.0]]))
    assert e.value.index == 1


def test_jacobi_scaled_diagonal_two_iterations():
    A = SparseMatrix.diag([1e6, 1.0])
    out = solve(A, np.array([1.0, 1.0]), SolverSpec(kind="gmres", precond="jacobi", tol=1e-12))
    assert out.converged and out.iterations <= 2


def test_ilu0_not_worse_on_tridiagonal():
    A = tridiag(100)
    b = np.ones(100)
    plain = solve(A, b, SolverSpec(kind="gmres", tol=1e-10))
    ilu = solve(A, b, SolverSpec(kind="gmres", precond="ilu0", tol=1e-10))
    assert ilu.converged and plain.converged and ilu.iterations <= plain.iterations


def test_bicgstab_identity_one_iteration():
    out = bicgstab_kernel(lambda v: v, np.ones(5), tol=1e-12)
    assert out.converged and out.iterations == 1


def test_bicgstab_matches_direct():
    A = tridiag(80)
    b = np.random.default_rng(1).uniform(-1, 1, 80)
    xd = solve(A, b).x
    xb = solve(A, b, SolverSpec(kind="bicgstab", tol=1e-12)).x
    assert np.linalg.norm(xb - xd) <= 1e-8 * np.linalg.norm(xd)


@pytest.mark.parametrize("kind", ["gmres", "bicgstab"])
def test_singular_does_not_hang(kind):
    A = SparseMatrix.from_dense([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    out = solve(A, np.array([1.0, 0.0, 1.0]), SolverSpec(kind=kind, max_iter=500))
    assert not out.converged and out.wall_time < 5.0


def test_bicgstab_breakdown_reported():
    # rotation: r_hat . A r_hat = 0 at the first step
    op = lambda v: np.array([-v[1], v[0]])  # noqa: E731
    out = bicgstab_kernel(op, np.array([1.0, 0.0]), tol=1e-12)
    assert not out.converged and out.breakdown


def test_gmres_residual_monotone_within_cycle():
    A, _ = random_sparse(60, 0.1, 2, diag=2.0)
    b = np.ones(60)
    out = gmres_kernel(lambda v: matvec(A, v), b, tol=1e-14, max_iter=60, restart=60)
    h = np.array(out.history)
    assert np.all(np.diff(h) <= 1e-15)


def test_gmres_restart_reported_true_residual():
    A = laplacian_2d(8)
    b = np.ones(64)
    out = gmres_kernel(lambda v: matvec(A, v), b, tol=1e-10, max_iter=500, restart=5)
    assert out.converged
    assert np.linalg.norm(matvec(A, out.x) - b) <= 1e-10 * np.linalg.norm(b)


def test_direct_singular_raises():
    with pytest.raises(NumericallySingular):
        solve(SparseMatrix.from_dense([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        solve(SparseMatrix.identity(3), np.ones(2))
    with pytest.raises(DimensionMismatch):
        solve(SparseMatrix.from_dense(np.ones((2, 3))), np.ones(2))


def test_spec_validation_and_parse():
    with pytest.raises(ValueError):
        SolverSpec(tol=0.0)
    with pytest.raises(ValueError):
        SolverSpec(restart=0)
    with pytest.raises(ValueError):
        SolverSpec(kind="cg")
    s = SolverSpec.parse("gmres,precond=ilu0,scaling=column,tol=1e-9,max_iter=5,restart=7")
    assert (s.kind, s.precond, s.scaling, s.tol, s.max_iter, s.restart) == \
        ("gmres", "ilu0", "column", 1e-9, 5, 7)
    with pytest.raises(ValueError):
        SolverSpec.parse("gmres,color=red")


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2 ** 31), st.sampled_from(ALL))
def test_converged_means_true_residual_below_tol(n, seed, spec):
    A, _ = random_sparse(n, 0.3, seed, diag=3.0)
    b = np.random.default_rng(seed).standard_normal(n)
    try:
        out = solve(A, b, spec)
    except Exception:
        return
    if out.converged and spec.kind != "direct_lu":
        r = np.linalg.norm(A.to_dense() @ out.x - b) / np.linalg.norm(b)
        assert r <= spec.tol * (1 + 1e-10)
        # both are rounding-limited once the residual nears n * eps * ||A|| ||x||
        floor = 4 * n * 2.0 ** -53 * np.linalg.norm(A.to_dense(), 2) * np.linalg.norm(out.x) \
            / np.linalg.norm(b)
        assert out.relative_residual == pytest.approx(r, rel=1e-6, abs=floor)


@pytest.mark.parametrize("spec", [s for s in ALL if s.scaling == "column"], ids=lambda s: s.label)
def test_column_scaling_composition_bitwise(spec):
    A, _ = random_sparse(25, 0.2, 5, diag=2.0)
    A = A.scale_columns(np.logspace(-2, 3, 25))
    b = np.random.default_rng(3).standard_normal(25)
    As, D = column_scale(A)
    inner = solve(As, b, SolverSpec(kind=spec.kind, tol=spec.tol, precond=spec.precond))
    assert np.array_equal(solve(A, b, spec).x, unscale_solution(inner.x, D))


def test_direct_tight_bound_well_conditioned():
    for seed, kappa in [(1, 1e2), (2, 1e5), (3, 1e8)]:
        a, s = constructed_svd(40, kappa, seed)
        A = SparseMatrix.from_dense(a)
        b = a @ np.random.default_rng(seed).uniform(-1, 1, 40)
        x = solve(A, b).x
        rep = verify_solution(A, x, b, kappa=float(s[0] / s[-1]), A_norm=float(s[0]))
        assert rep.tight_upper <= 1e-6
