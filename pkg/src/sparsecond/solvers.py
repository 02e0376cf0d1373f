"""Reference direct and Krylov solvers with scaling and preconditioning.

``solve`` applies row or column scaling first, then runs the requested
solver. Jacobi preconditioning is applied from the left (``D⁻¹A x = D⁻¹b``).
ILU(0) is applied from the right (``A M⁻¹ u = b``, ``x = M⁻¹ u``) so the
Krylov residual is the true residual. The reported residual is always
recomputed against the original, unscaled system.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .factorization import DEFAULT_PIVOT_TOL, ilu0, lu_factorize, lu_solve
from .exceptions import DimensionMismatch, ZeroDiagonal
from .sparse import (ScalingDiagonal, _vec, column_scale, matvec, row_scale, two_norm,
                     unscale_solution)

KINDS = ("direct_lu", "gmres", "bicgstab")
PRECONDITIONERS = ("none", "jacobi", "ilu0")
SCALINGS = ("none", "column", "row")


@dataclass(frozen=True)
class SolverSpec:
    kind: str = "direct_lu"
    tol: float = 1e-7
    max_iter: int = 1000
    restart: int = 50
    precond: str = "none"
    scaling: str = "none"
    pivot_tol: float = DEFAULT_PIVOT_TOL

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown solver {self.kind!r}; choose from {KINDS}")
        if self.precond not in PRECONDITIONERS:
            raise ValueError(f"unknown preconditioner {self.precond!r}")
        if self.scaling not in SCALINGS:
            raise ValueError(f"unknown scaling {self.scaling!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.restart < 1 or self.max_iter < 1:
            raise ValueError("restart and max_iter must be at least 1")

    @property
    def label(self):
        parts = [self.kind]
        if self.kind != "direct_lu" and self.precond != "none":
            parts.append(self.precond)
        if self.scaling != "none":
            parts.append(f"{self.scaling}-scaled")
        return "+".join(parts)

    @classmethod
    def parse(cls, text):
        """Parse ``kind[,key=value...]``, e.g. ``gmres,precond=ilu0,scaling=column``."""
        head, *rest = [p.strip() for p in text.split(",") if p.strip()]
        kw = {"kind": head}
        for item in rest:
            key, sep, val = item.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in cls.__dataclass_fields__ or key == "kind":
                raise ValueError(f"bad solver option {item!r} in {text!r}")
            typ = cls.__dataclass_fields__[key].type
            try:
                kw[key] = typ(val.strip())
            except ValueError:
                raise ValueError(f"bad value for {key} in {text!r}") from None
        return cls(**kw)


@dataclass
class SolveOutcome:
    x: np.ndarray
    iterations: int
    relative_residual: float
    converged: bool
    wall_time: float
    breakdown: Optional[str] = None
    history: list = field(default_factory=list, repr=False)


def jacobi_preconditioner(A):
    """Diagonal magnitudes ``|A[i, i]|`` as a :class:`ScalingDiagonal`."""
    d = np.abs(A.diagonal())
    zero = np.nonzero(d == 0)[0]
    if zero.shape[0]:
        raise ZeroDiagonal(int(zero[0]))
    return ScalingDiagonal(d)


def gmres_kernel(op, b, tol=1e-7, max_iter=1000, restart=50, x0=None, apply_right=None):
    """Restarted GMRES with modified Gram-Schmidt and Givens rotations.

    Parameters
    ----------
    op : callable
        ``v -> K v`` for the (possibly preconditioned) operator ``K``.
    b : ndarray
    tol : float
        Stop once ``||b - K u|| <= tol * ||b||``.
    max_iter : int
        Total number of inner iterations (operator applications).
    restart : int
        Krylov subspace dimension per cycle.
    x0 : ndarray, optional
        Initial guess; zero by default.
    apply_right : callable, optional
        ``u -> M⁻¹ u``. When given ``op`` must be ``A M⁻¹`` and the returned
        ``x`` is mapped back through ``M⁻¹``.

    Returns
    -------
    SolveOutcome
        ``relative_residual`` here is for the system ``K u = b``;
        ``history`` has the residual estimate after every inner iteration.
    """
    t0 = time.perf_counter()
    n = b.shape[0]
    u = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    bnorm = two_norm(b)
    history = []
    if bnorm == 0.0:
        return SolveOutcome(np.zeros(n), 0, 0.0, True, time.perf_counter() - t0, None, history)
    r = b - op(u) if x0 is not None else b.copy()
    beta = two_norm(r)
    target = tol * bnorm
    its = 0
    converged = beta <= target
    breakdown = None
    m = max(1, min(restart, n))
    while not converged and its < max_iter:
        V = np.zeros((m + 1, n))
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        V[0] = r / beta
        k = 0
        happy = False
        while k < m and its < max_iter:
            w = op(V[k])
            for j in range(k + 1):
                H[j, k] = w @ V[j]
                w = w - H[j, k] * V[j]
            H[k + 1, k] = two_norm(w)
            if H[k + 1, k] > 0.0:
                V[k + 1] = w / H[k + 1, k]
            else:
                happy = True
            for j in range(k):
                tmp = cs[j] * H[j, k] + sn[j] * H[j + 1, k]
                H[j + 1, k] = -sn[j] * H[j, k] + cs[j] * H[j + 1, k]
                H[j, k] = tmp
            denom = math.hypot(H[k, k], H[k + 1, k])
            if denom == 0.0:
                breakdown = "zero Hessenberg column"
                break
            cs[k] = H[k, k] / denom
            sn[k] = H[k + 1, k] / denom
            H[k, k] = denom
            H[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]
            its += 1
            k += 1
            history.append(abs(g[k]) / bnorm)
            if abs(g[k]) <= target or happy:
                break
        if k > 0:
            y = _back_substitute(H[:k, :k], g[:k])
            u = u + V[:k].T @ y
        r = b - op(u)
        beta = two_norm(r)
        converged = beta <= target
        if breakdown is not None or (happy and not converged):
            if breakdown is None:
                breakdown = "Krylov space exhausted without convergence"
            break
    x = u if apply_right is None else apply_right(u)
    return SolveOutcome(x, its, beta / bnorm, bool(converged), time.perf_counter() - t0,
                        breakdown, history)


def _back_substitute(R, g):
    k = g.shape[0]
    y = np.zeros(k)
    for i in range(k - 1, -1, -1):
        y[i] = (g[i] - R[i, i + 1:] @ y[i + 1:]) / R[i, i]
    return y


_BREAKDOWN_TOL = 1e-300


def bicgstab_kernel(op, b, tol=1e-7, max_iter=1000, x0=None, apply_right=None):
    """BiCGSTAB for ``K u = b``; same conventions as :func:`gmres_kernel`.

    A vanishing ``rho`` or ``omega`` ends the run with ``converged=False``
    and the reason in ``breakdown``.
    """
    t0 = time.perf_counter()
    n = b.shape[0]
    u = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    bnorm = two_norm(b)
    history = []
    if bnorm == 0.0:
        return SolveOutcome(np.zeros(n), 0, 0.0, True, time.perf_counter() - t0, None, history)
    r = b - op(u) if x0 is not None else b.copy()
    r_hat = r.copy()
    target = tol * bnorm
    rho_old = alpha = omega = 1.0
    v = np.zeros(n)
    p = np.zeros(n)
    rnorm = two_norm(r)
    converged = rnorm <= target
    breakdown = None
    its = 0
    while not converged and its < max_iter:
        rho = r_hat @ r
        if abs(rho) <= _BREAKDOWN_TOL * bnorm * bnorm:
            breakdown = "rho breakdown"
            break
        beta = (rho / rho_old) * (alpha / omega)
        p = r + beta * (p - omega * v)
        v = op(p)
        rv = r_hat @ v
        if rv == 0.0 or not math.isfinite(rv):
            breakdown = "r_hat.v breakdown"
            break
        alpha = rho / rv
        s = r - alpha * v
        its += 1
        snorm = two_norm(s)
        if snorm <= target:
            u = u + alpha * p
            rnorm = snorm
            history.append(rnorm / bnorm)
            converged = True
            break
        t = op(s)
        tt = t @ t
        if tt == 0.0:
            breakdown = "omega breakdown"
            u = u + alpha * p
            break
        omega = (t @ s) / tt
        u = u + alpha * p + omega * s
        r = s - omega * t
        rnorm = two_norm(r)
        history.append(rnorm / bnorm)
        if not math.isfinite(rnorm):
            breakdown = "non-finite residual"
            break
        if rnorm <= target:
            converged = True
            break
        if abs(omega) <= _BREAKDOWN_TOL:
            breakdown = "omega breakdown"
            break
        rho_old = rho
    # confirm against the recomputed residual, not the recurrence
    rtrue = two_norm(b - op(u))
    converged = bool(converged and rtrue <= target)
    x = u if apply_right is None else apply_right(u)
    return SolveOutcome(x, its, rtrue / bnorm, converged, time.perf_counter() - t0,
                        breakdown, history)


def _krylov(A, b, spec):
    kernel = gmres_kernel if spec.kind == "gmres" else bicgstab_kernel
    extra = {"restart": spec.restart} if spec.kind == "gmres" else {}
    if spec.precond == "jacobi":
        d = jacobi_preconditioner(A).factors
        op = lambda v: matvec(A, v) / d  # noqa: E731
        rhs = b / d
        right = None
    elif spec.precond == "ilu0":
        M = ilu0(A)
        right = lambda u: lu_solve(M, u)  # noqa: E731
        op = lambda u: matvec(A, right(u))  # noqa: E731
        rhs = b
    else:
        op = lambda v: matvec(A, v)  # noqa: E731
        rhs = b
        right = None
    out = kernel(op, rhs, spec.tol, spec.max_iter, apply_right=right, **extra)
    # a left preconditioner changes the residual being minimized; tighten
    # and continue from the current iterate until the true residual agrees
    bnorm = two_norm(b)
    tries = 0
    while (spec.precond == "jacobi" and out.converged and bnorm > 0 and tries < 3
           and two_norm(b - matvec(A, out.x)) > spec.tol * bnorm):
        ratio = two_norm(b - matvec(A, out.x)) / (spec.tol * bnorm)
        more = kernel(op, rhs, out.relative_residual / (2.0 * ratio),
                      max(1, spec.max_iter - out.iterations), x0=out.x, **extra)
        more.iterations += out.iterations
        more.history = out.history + more.history
        more.wall_time += out.wall_time
        out = more
        tries += 1
    return out


def _solve_unscaled(A, b, spec):
    if spec.kind == "direct_lu":
        t0 = time.perf_counter()
        F = lu_factorize(A, spec.pivot_tol)
        x = lu_solve(F, b)
        return SolveOutcome(x, 1, math.nan, True, time.perf_counter() - t0)
    return _krylov(A, b, spec)


def solve(A, b, spec=SolverSpec()):
    """Solve ``A x = b`` as described by ``spec``.

    Scaling is applied first (column: ``(A D⁻¹)(D x) = b``; row:
    ``(D⁻¹A) x = D⁻¹b``), then the solver. Factorization errors from the
    direct path propagate; Krylov non-convergence is reported, never raised.
    """
    if A.nrows != A.ncols:
        raise DimensionMismatch(f"square matrix required, got {A.shape}")
    b = _vec(b, A.nrows, "right-hand side")
    t0 = time.perf_counter()
    if spec.scaling == "column":
        As, D = column_scale(A)
        out = _solve_unscaled(As, b, spec)
        out.x = unscale_solution(out.x, D)
    elif spec.scaling == "row":
        As, bs = row_scale(A, b)
        out = _solve_unscaled(As, bs, spec)
    else:
        out = _solve_unscaled(A, b, spec)
    out.wall_time = time.perf_counter() - t0
    bnorm = two_norm(b)
    res = two_norm(matvec(A, out.x) - b)
    out.relative_residual = res / bnorm if bnorm > 0 else res
    if spec.kind != "direct_lu":
        out.converged = bool(out.converged and out.relative_residual <= spec.tol)
    return out
