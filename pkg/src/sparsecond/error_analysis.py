"""Relative-error bounds and accept/reject verdicts for approximate solutions.

With ``r = A x_hat - b`` and ``kappa = ||A|| ||inv(A)||``:

* loose bounds on ``||x_hat - x|| / ||x||``:
  ``rho / kappa <= err <= kappa * rho`` with ``rho = ||r|| / ||b||``;
* tight bounds on ``||x_hat - x|| / ||x_hat||``:
  ``eta <= err_hat <= kappa * eta`` with ``eta = ||r|| / (||A|| ||x_hat||)``;
* if ``err_hat <= e < 1`` then ``||x_hat - x|| / ||x|| <= e / (1 - e)``;
* roundoff alone (unit roundoff ``u``) may cost ``2 u kappa / (1 - kappa u)``,
  unbounded once ``kappa * u >= 1``.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .condest import AdamConfig, cond2, norm2
from .exceptions import DimensionMismatch, ZeroRHS, ZeroSolution
from .sparse import _vec, matvec, two_norm

EPS_MACH = 2.0 ** -53
DEFAULT_THRESHOLD = 1e-7

ACCEPTED = "accepted"
REJECTED = "rejected"
NUMERICALLY_SINGULAR = "numerically_singular"


def _check_kappa(kappa):
    # estimates of an exact kappa == 1 may land an ulp below it
    if not kappa >= 1.0 - 1e-12:
        raise ValueError(f"condition number must be >= 1, got {kappa!r}")


def _amplify(kappa, q):
    # 0 * inf stays 0: an exact residual needs no amplification
    return 0.0 if q == 0.0 else kappa * q


def loose_bounds(residual_norm, b_norm, kappa):
    """Bounds on the error relative to the true solution."""
    if b_norm == 0:
        raise ZeroRHS("right-hand side has zero norm")
    _check_kappa(kappa)
    rho = residual_norm / b_norm
    return rho / kappa, _amplify(kappa, rho)


def tight_bounds(residual_norm, A_norm, xhat_norm, kappa):
    """Bounds on the error relative to the approximate solution."""
    if xhat_norm == 0:
        raise ZeroSolution("approximate solution has zero norm")
    if not A_norm > 0:
        raise ValueError("matrix norm must be positive")
    _check_kappa(kappa)
    eta = residual_norm / (A_norm * xhat_norm)
    return eta, _amplify(kappa, eta)


def propagate_bound(eps_tight):
    """Turn a bound on ``||x_hat - x|| / ||x_hat||`` into one on ``/ ||x||``."""
    if eps_tight < 0:
        raise ValueError("eps_tight must be nonnegative")
    if eps_tight >= 1.0:
        return math.inf
    return eps_tight / (1.0 - eps_tight)


_SPLIT = 134217729.0  # 2**27 + 1


def _two_product(a, b):
    """``a * b == p + e`` exactly (Dekker)."""
    p = a * b
    ca = _SPLIT * a
    ah = ca - (ca - a)
    al = a - ah
    cb = _SPLIT * b
    bh = cb - (cb - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _kappa_eps(kappa, eps_mach):
    """``(p, e)`` with ``p + e == kappa * eps_mach`` when representable."""
    p, e = _two_product(float(kappa), float(eps_mach))
    if not math.isfinite(e):
        e = 0.0
    return p, e


def is_numerically_singular(kappa, eps_mach=EPS_MACH):
    """True exactly when ``kappa * eps_mach >= 1``."""
    if math.isinf(kappa):
        return True
    p, e = _kappa_eps(kappa, eps_mach)
    return p > 1.0 or (p == 1.0 and e >= 0.0)


def singularity_bound(kappa, eps_mach=EPS_MACH):
    """Worst-case relative error caused by rounding the data alone."""
    if not eps_mach > 0:
        raise ValueError("eps_mach must be positive")
    _check_kappa(kappa)
    if is_numerically_singular(kappa, eps_mach):
        return math.inf
    p, e = _kappa_eps(kappa, eps_mach)
    denom = (1.0 - p) - e
    return 2.0 * eps_mach * kappa / denom


@dataclass(frozen=True)
class BoundsReport:
    """Every quantity needed to judge one ``(A, x_hat, b)`` triple."""

    residual_norm: float
    b_norm: float
    A_norm: float
    xhat_norm: float
    kappa: float
    loose_lower: float
    loose_upper: float
    tight_lower: float
    tight_upper: float
    true_error_cap: float
    singularity_cap: float
    verdict: str
    threshold: float
    eps_mach: float
    kappa_source: str
    A_norm_source: str

    @property
    def relative_residual(self):
        return self.residual_norm / self.b_norm

    def to_record(self):
        """Flat ``{name: value}`` mapping used by the CLI and the benchmark."""
        rec = asdict(self)
        rec["relative_residual"] = self.relative_residual
        return rec


def verify_solution(A, xhat, b, kappa=None, threshold=DEFAULT_THRESHOLD,
                    eps_mach=EPS_MACH, A_norm=None, cfg=AdamConfig(), restarts=3):
    """Bound the error of ``xhat`` and decide whether to accept it.

    ``kappa`` and ``A_norm`` are estimated with projected Adam when not
    given. The verdict is ``numerically_singular`` when
    ``kappa * eps_mach >= 1``, otherwise ``accepted`` iff the tight upper
    bound is at most ``threshold``.
    """
    if A.nrows != A.ncols:
        raise DimensionMismatch(f"square matrix required, got {A.shape}")
    xhat = _vec(xhat, A.ncols, "solution")
    b = _vec(b, A.nrows, "right-hand side")
    xhat_norm = two_norm(xhat)
    if xhat_norm == 0:
        raise ZeroSolution("approximate solution has zero norm")
    b_norm = two_norm(b)
    residual_norm = two_norm(matvec(A, xhat) - b)

    kappa_source = "supplied"
    A_norm_source = "supplied"
    if kappa is None:
        est = cond2(A, cfg, restarts)
        kappa = est.kappa
        kappa_source = "cond2"
        if A_norm is None:
            A_norm = est.norm.value
            A_norm_source = "cond2"
    if A_norm is None:
        A_norm = norm2(A, cfg, restarts).value
        A_norm_source = "norm2"
    kappa = float(kappa)

    lo, hi = loose_bounds(residual_norm, b_norm, kappa)
    tlo, thi = tight_bounds(residual_norm, A_norm, xhat_norm, kappa)
    singular = is_numerically_singular(kappa, eps_mach)
    if singular:
        verdict = NUMERICALLY_SINGULAR
    elif thi <= threshold:
        verdict = ACCEPTED
    else:
        verdict = REJECTED
    return BoundsReport(
        residual_norm=residual_norm, b_norm=b_norm, A_norm=float(A_norm),
        xhat_norm=xhat_norm, kappa=kappa,
        loose_lower=lo, loose_upper=hi, tight_lower=tlo, tight_upper=thi,
        true_error_cap=propagate_bound(thi),
        singularity_cap=singularity_bound(kappa, eps_mach),
        verdict=verdict, threshold=threshold, eps_mach=eps_mach,
        kappa_source=kappa_source, A_norm_source=A_norm_source,
    )


def measured_errors(x_true, xhat):
    """``(||x_hat - x|| / ||x||, ||x_hat - x|| / ||x_hat||)`` for a known ``x``."""
    x_true = np.asarray(x_true, dtype=float)
    d = two_norm(np.asarray(xhat, dtype=float) - x_true)
    nx, nh = two_norm(x_true), two_norm(xhat)
    return (d / nx if nx else math.inf), (d / nh if nh else math.inf)
