"""L2 norms and condition numbers by projected Adam on the unit sphere.

The 2-norm of an operator ``Op`` is the maximum of ``||Op v|| / ||v||``.
Minimizing the scale-free loss::

    L(v) = log ||v|| - log ||Op v||

with Adam, while keeping every update tangent to the unit sphere and
renormalizing after each step, recovers ``||Op||_2 = exp(-min L)``.
For ``Op = A`` the gradient needs ``A v`` and ``A.T (A v)``; for
``Op = inv(A)`` both products come from one LU factorization.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .exceptions import DegenerateDirection, SingularMatrix
from .factorization import DEFAULT_PIVOT_TOL, lu_factorize, lu_solve, lu_transpose_solve
from .sparse import matvec, transpose_matvec, two_norm


@dataclass(frozen=True)
class AdamConfig:
    """Hyperparameters of the projected Adam iteration.

    ``eps_stab`` is the Adam denominator guard, unrelated to machine
    epsilon. The run stops early once the best loss has not improved by
    ``rel_tol * |loss_min|`` for ``patience`` iterations, or as soon as the
    tangential gradient norm drops to ``grad_tol``.
    """

    alpha: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps_stab: float = 1e-8
    max_iter: int = 2000
    seed: int = 0
    rel_tol: float = 1e-12
    patience: int = 100
    grad_tol: float = 1e-15

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0 <= self.beta1 < 1 or not 0 <= self.beta2 < 1:
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if not self.eps_stab > 0:
            raise ValueError("eps_stab must be positive")
        if self.max_iter < 1 or self.patience < 1:
            raise ValueError("max_iter and patience must be at least 1")

    def with_seed(self, seed):
        return replace(self, seed=seed)


@dataclass
class AdamState:
    """Iteration state, handed to the optional ``callback`` every step."""

    x: np.ndarray
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    loss: float = math.inf
    loss_min: float = math.inf
    x_min: Optional[np.ndarray] = None
    step: Optional[np.ndarray] = None
    step_raw: Optional[np.ndarray] = None
    x_prev: Optional[np.ndarray] = None


@dataclass(frozen=True)
class NormEstimate:
    """Estimated operator 2-norm with the unit vector that attains it."""

    value: float
    witness: np.ndarray
    iterations: int
    converged: bool
    loss_min: float = math.nan
    history: tuple = field(default=(), repr=False)

    def __float__(self):
        return float(self.value)


class ExplicitOracle:
    """Loss and gradient for ``Op = A`` (any shape)."""

    def __init__(self, A):
        self.A = A
        self.dim = A.ncols

    def apply(self, x):
        return matvec(self.A, x)

    def evaluate(self, x):
        """Return ``(loss, grad, ||Op x||)`` at ``x``."""
        ax = matvec(self.A, x)
        nax = two_norm(ax)
        if nax == 0.0:
            raise DegenerateDirection("A x == 0: direction lies in the kernel")
        nx = two_norm(x)
        grad = x / (nx * nx) - transpose_matvec(self.A, ax) / (nax * nax)
        return math.log(nx) - math.log(nax), grad, nax


class InverseOracle:
    """Loss and gradient for ``Op = inv(A)`` through LU factors.

    ``r = inv(A) x`` comes from one solve and ``s = inv(A).T r`` from one
    transposed solve; the gradient is ``x/||x||^2 - s/||r||^2``.
    """

    def __init__(self, factors):
        self.F = factors
        self.dim = factors.n

    def apply(self, x):
        return lu_solve(self.F, x)

    def evaluate(self, x):
        r = lu_solve(self.F, x)
        nr = two_norm(r)
        if nr == 0.0 or not math.isfinite(nr):
            raise DegenerateDirection("inv(A) x is zero or not finite")
        s = lu_transpose_solve(self.F, r)
        nx = two_norm(x)
        grad = x / (nx * nx) - s / (nr * nr)
        return math.log(nx) - math.log(nr), grad, nr


def loss_explicit(A, x):
    return ExplicitOracle(A).evaluate(np.asarray(x, dtype=float))[0]


def grad_explicit(A, x):
    return ExplicitOracle(A).evaluate(np.asarray(x, dtype=float))[1]


def loss_inverse(F, x):
    return InverseOracle(F).evaluate(np.asarray(x, dtype=float))[0]


def grad_inverse(F, x):
    return InverseOracle(F).evaluate(np.asarray(x, dtype=float))[1]


def _random_unit(rng, n):
    x = rng.standard_normal(n)
    return x / two_norm(x)


_MAX_DRAWS = 10


def projected_adam(oracle, cfg=AdamConfig(), callback: Optional[Callable] = None):
    """Maximize ``||Op x||`` over unit vectors ``x``.

    Parameters
    ----------
    oracle : ExplicitOracle or InverseOracle
        Anything with ``dim`` and ``evaluate(x) -> (loss, grad, ||Op x||)``.
    cfg : AdamConfig
    callback : callable, optional
        Called as ``callback(state)`` after every iteration.

    Returns
    -------
    NormEstimate
        ``value = exp(-loss_min)``, i.e. ``||Op x_min||`` for the best unit
        iterate seen. ``converged`` is False only when ``max_iter`` ran out.
    """
    n = oracle.dim
    rng = np.random.default_rng(cfg.seed)
    for _ in range(_MAX_DRAWS):
        x = _random_unit(rng, n)
        try:
            loss, g, _ = oracle.evaluate(x)
            break
        except DegenerateDirection:
            continue
    else:
        # every draw was annihilated: the operator is (numerically) zero
        return NormEstimate(0.0, x, 0, False)

    x_init, loss_init = x, loss
    st = AdamState(x=x, m=np.zeros(n), v=np.zeros(n), x_min=x)
    b1, b2 = cfg.beta1, cfg.beta2
    best_ref = math.inf
    stall = 0
    converged = False
    history = []
    t = 0
    for t in range(1, cfg.max_iter + 1):
        # stationary on the sphere: nothing left to gain
        gt = g - (x @ g) * x
        if two_norm(gt) <= cfg.grad_tol:
            if loss < st.loss_min:
                st.loss_min, st.x_min = loss, x
            converged = True
            t -= 1
            break

        st.m = b1 * st.m + (1.0 - b1) * g
        st.v = b2 * st.v + (1.0 - b2) * (g * g)
        m_hat = st.m / (1.0 - b1 ** t)
        v_hat = st.v / (1.0 - b2 ** t)
        raw = cfg.alpha * m_hat / (np.sqrt(v_hat) + cfg.eps_stab)
        dx = raw - (x @ raw) * x
        x_prev = x
        x = x - dx
        x = x / two_norm(x)

        try:
            loss, g, _ = oracle.evaluate(x)
        except DegenerateDirection:
            break
        if loss < st.loss_min:
            if not math.isfinite(best_ref) or loss < best_ref - cfg.rel_tol * abs(best_ref):
                best_ref = loss
                stall = 0
            else:
                stall += 1
            st.loss_min, st.x_min = loss, x
        else:
            stall += 1
        history.append(st.loss_min)

        if callback is not None:
            st.x, st.t, st.loss = x, t, loss
            st.step, st.step_raw, st.x_prev = dx, raw, x_prev
            callback(st)
        if stall >= cfg.patience:
            converged = True
            break

    if not math.isfinite(st.loss_min):
        st.loss_min, st.x_min = loss_init, x_init
    value = math.exp(-st.loss_min)
    return NormEstimate(value, st.x_min, t, converged, st.loss_min, tuple(history))


def _best_of(oracle, cfg, restarts):
    best = None
    for r in range(max(1, restarts)):
        est = projected_adam(oracle, cfg.with_seed(cfg.seed + r))
        if best is None or est.loss_min < best.loss_min:
            best = est
    _check_witness(oracle, best)
    return best


def _check_witness(oracle, est):
    if est.iterations == 0 and est.value == 0.0:
        return
    direct = two_norm(oracle.apply(est.witness))
    if abs(direct - est.value) > 1e-12 * max(direct, est.value):
        raise AssertionError(f"norm estimate {est.value!r} disagrees with "
                             f"||Op w|| = {direct!r}")


def norm2(A, cfg=AdamConfig(), restarts=1):
    """Estimate ``||A||_2``."""
    return _best_of(ExplicitOracle(A), cfg, restarts)


def inv_norm2(F, cfg=AdamConfig(), restarts=1):
    """Estimate ``||inv(A)||_2`` from LU factors of ``A``."""
    return _best_of(InverseOracle(F), cfg, restarts)


@dataclass(frozen=True)
class CondEstimate:
    """Condition number ``kappa_2 = ||A|| * ||inv(A)||`` with its parts.

    When the factorization fails ``kappa`` is ``inf``, ``inv_norm`` is None
    and ``singular_reason`` carries the factorization message.
    """

    kappa: float
    norm: NormEstimate
    inv_norm: Optional[NormEstimate]
    singular_reason: Optional[str] = None

    def __float__(self):
        return float(self.kappa)


def cond2(A, cfg=AdamConfig(), restarts=3, pivot_tol=DEFAULT_PIVOT_TOL, factors=None):
    """Estimate the L2 condition number of a square sparse matrix.

    Each norm is the best of ``restarts`` seeded runs (seeds ``cfg.seed``,
    ``cfg.seed + 1``, ...). A factorization failure is reported as
    ``kappa = inf`` rather than raised.
    """
    if A.nrows != A.ncols:
        raise ValueError(f"cond2 needs a square matrix, got {A.shape}")
    nrm = norm2(A, cfg, restarts)
    try:
        F = factors if factors is not None else lu_factorize(A, pivot_tol)
    except SingularMatrix as exc:
        return CondEstimate(math.inf, nrm, None, str(exc))
    inv = inv_norm2(F, cfg, restarts)
    if inv.iterations == 0 and inv.value == 0.0:
        return CondEstimate(math.inf, nrm, inv, "inverse solves are not finite")
    return CondEstimate(nrm.value * inv.value, nrm, inv)
