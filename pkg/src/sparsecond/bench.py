"""Benchmark harness: ill-conditioned generator, timed solves, error bounds.

Each report row holds, for one (matrix, solver) pair, the total and median
solve time with percentile-bootstrap confidence intervals, the loose and
tight error bounds, the verdict, and the measured errors against the known
solution. Bounds come from the repetition with the largest tight upper
bound (the critical repetition).
"""

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .condest import AdamConfig, cond2
from .error_analysis import DEFAULT_THRESHOLD, NUMERICALLY_SINGULAR, measured_errors, verify_solution
from .matio import read_matrix_market
from .solvers import SolverSpec, solve
from .sparse import SparseMatrix, column_norms, matvec


@dataclass(frozen=True)
class GeneratorSpec:
    """Synthetic matrix with two groups of column norms.

    ``A = B S``: ``B`` is a diagonally dominant sparse matrix with unit
    columns, ``S`` puts ``round(small_col_fraction * n)`` randomly chosen
    columns at ``small_scale`` and the others at ``large_scale``.
    ``coupling`` sets the off-diagonal strength of ``B`` relative to its
    unit diagonal, which controls the conditioning left after column
    scaling.

    With ``balanced_solution`` the known solution is ``S⁻¹ z`` with ``z``
    uniform in [-1, 1]; otherwise ``x_true`` itself is uniform in [-1, 1].
    """

    n: int = 200
    small_col_fraction: float = 0.324
    small_scale: float = 1e-2
    large_scale: float = 1e10
    density: float = 0.05
    coupling: float = 1.0
    seed: int = 0
    balanced_solution: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0 <= self.small_col_fraction < 1:
            raise ValueError("small_col_fraction must lie in [0, 1)")
        if not 0 < self.small_scale < self.large_scale or not math.isfinite(self.large_scale):
            raise ValueError("need 0 < small_scale < large_scale < inf")
        if not 0 <= self.density <= 1:
            raise ValueError("density must lie in [0, 1]")
        if not self.coupling >= 0:
            raise ValueError("coupling must be nonnegative")

    @property
    def label(self):
        return f"gen(n={self.n},frac={self.small_col_fraction:g},seed={self.seed})"


def _column_groups(spec, rng):
    k = int(round(spec.small_col_fraction * spec.n))
    s = np.full(spec.n, spec.large_scale)
    s[rng.permutation(spec.n)[:k]] = spec.small_scale
    return s


def _base(spec, rng):
    n = spec.n
    m = int(round(spec.density * n * n))
    flat = rng.choice(n * n, size=min(m, n * n), replace=False)
    r, c = np.divmod(flat, n)
    off = r != c
    r, c = r[off], c[off]
    w = spec.coupling / math.sqrt(max(n * spec.density, 1.0))
    v = w * rng.standard_normal(r.shape[0])
    d = np.arange(n)
    B0 = SparseMatrix.from_coo(n, n, np.concatenate([d, r]), np.concatenate([d, c]),
                               np.concatenate([np.ones(n), v]))
    return B0.scale_columns(1.0 / column_norms(B0))


def generate_illconditioned(spec=GeneratorSpec()):
    """Sparse nonsingular matrix whose columns fall into two norm plateaus."""
    return _generate(spec)[0]


def _generate(spec):
    rng = np.random.default_rng(spec.seed)
    B = _base(spec, rng)
    s = _column_groups(spec, rng)
    return B.scale_columns(s), s, rng


def generate_system(spec=GeneratorSpec()):
    """``(A, x_true, b)`` with ``b = A x_true``."""
    A, s, rng = _generate(spec)
    z = rng.uniform(-1.0, 1.0, spec.n)
    x_true = z / s if spec.balanced_solution else z
    return A, x_true, matvec(A, x_true)


def bootstrap_ci(samples, confidence=0.95, resamples=10000, seed=0, statistic=np.median,
                 chunk=2000):
    """Percentile bootstrap interval for ``statistic`` (the median by default).

    Deterministic for a fixed ``seed``. One sample, or identical samples,
    give a degenerate interval.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.shape[0] == 0:
        raise ValueError("bootstrap_ci needs at least one sample")
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    if resamples < 1:
        raise ValueError("resamples must be positive")
    if x.shape[0] == 1 or np.all(x == x[0]):
        c = float(statistic(x))
        return c, c
    rng = np.random.default_rng(seed)
    n = x.shape[0]
    stats = np.empty(resamples)
    for lo in range(0, resamples, chunk):
        hi = min(lo + chunk, resamples)
        idx = rng.integers(0, n, size=(hi - lo, n))
        stats[lo:hi] = statistic(x[idx], axis=1)
    a = (1.0 - confidence) / 2.0
    low, high = np.quantile(stats, [a, 1.0 - a])
    return float(low), float(high)


@dataclass
class BenchConfig:
    generators: list = field(default_factory=list)
    files: list = field(default_factory=list)
    solvers: list = field(default_factory=lambda: [SolverSpec()])
    repetitions: int = 5
    bootstrap_samples: int = 1000
    seed: int = 0
    threshold: float = DEFAULT_THRESHOLD
    adam: AdamConfig = AdamConfig()
    restarts: int = 3
    jobs: int = 1
    confidence: float = 0.95

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if self.bootstrap_samples < 100:
            raise ValueError("bootstrap_samples must be at least 100")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        if not self.solvers:
            raise ValueError("at least one solver is required")


FIELDS = (
    "matrix", "solver", "n", "nnz", "kappa", "A_norm", "repetitions",
    "time_to_solution", "total_ci_low", "total_ci_high",
    "median_time", "ci_low", "ci_high",
    "iterations", "converged", "relative_residual",
    "loose_lower", "loose_upper", "tight_lower", "tight_upper",
    "true_error_cap", "singularity_cap", "verdict",
    "measured_error", "measured_error_hat", "error",
)
WALL_FIELDS = ("time_to_solution", "total_ci_low", "total_ci_high",
               "median_time", "ci_low", "ci_high")


@dataclass
class BenchReport:
    rows: list
    config: Optional[BenchConfig] = None

    def to_csv(self, target=None):
        """CSV text with one header row; written to ``target`` when given."""
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: _cell(row.get(k)) for k in FIELDS})
        return _emit(buf.getvalue(), target)

    def to_jsonl(self, target=None):
        """One JSON object per row; non-finite floats become strings."""
        text = "".join(json.dumps({k: _json_value(row.get(k)) for k in FIELDS}) + "\n"
                       for row in self.rows)
        return _emit(text, target)

    def deterministic_view(self):
        """Rows without wall-clock fields, for reproducibility checks."""
        return [{k: v for k, v in r.items() if k not in WALL_FIELDS} for r in self.rows]


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "%.17g" % v
    return v


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def _emit(text, target):
    if target is None:
        return text
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text)
    return None


def _load_sources(cfg):
    """``[(label, A, x_true, b)]``; file matrices get a seeded uniform ``x_true``."""
    out = []
    for g in cfg.generators:
        A, x, b = generate_system(g)
        out.append((g.label, A, x, b))
    for i, path in enumerate(cfg.files):
        A = read_matrix_market(path)
        x = np.random.default_rng(cfg.seed + i).uniform(-1.0, 1.0, A.ncols)
        out.append((str(path), A, x, matvec(A, x)))
    return out


def _blank_row(label, A, spec, cfg):
    row = {k: None for k in FIELDS}
    row.update(matrix=label, solver=spec.label, n=A.nrows, nnz=A.nnz,
               repetitions=cfg.repetitions)
    return row


def _run_row(label, A, x_true, b, est, spec, cfg):
    row = _blank_row(label, A, spec, cfg)
    row.update(kappa=est.kappa, A_norm=est.norm.value)
    try:
        times, worst, worst_out = [], None, None
        for _ in range(cfg.repetitions):
            t0 = time.perf_counter()
            out = solve(A, b, spec)
            times.append(time.perf_counter() - t0)
            rep = verify_solution(A, out.x, b, kappa=est.kappa, A_norm=est.norm.value,
                                  threshold=cfg.threshold)
            if worst is None or rep.tight_upper > worst.tight_upper:
                worst, worst_out = rep, out
        t = np.array(times)
        tot_lo, tot_hi = bootstrap_ci(t, cfg.confidence, cfg.bootstrap_samples, cfg.seed,
                                      statistic=np.sum)
        med_lo, med_hi = bootstrap_ci(t, cfg.confidence, cfg.bootstrap_samples, cfg.seed)
        err, err_hat = measured_errors(x_true, worst_out.x)
        row.update(
            time_to_solution=float(t.sum()), total_ci_low=tot_lo, total_ci_high=tot_hi,
            median_time=float(np.median(t)), ci_low=med_lo, ci_high=med_hi,
            iterations=worst_out.iterations, converged=worst_out.converged,
            relative_residual=worst.relative_residual,
            loose_lower=worst.loose_lower, loose_upper=worst.loose_upper,
            tight_lower=worst.tight_lower, tight_upper=worst.tight_upper,
            true_error_cap=worst.true_error_cap, singularity_cap=worst.singularity_cap,
            verdict=worst.verdict, measured_error=err, measured_error_hat=err_hat,
        )
    except Exception as exc:  # recorded in the row, never aborts the run
        row["error"] = f"{type(exc).__name__}: {exc}"
        row["verdict"] = NUMERICALLY_SINGULAR if math.isinf(est.kappa) else "error"
    return row


def run_bench(cfg):
    """Run every solver on every matrix and collect a :class:`BenchReport`.

    The condition number is estimated once per matrix, outside the timed
    region. Rows may run on ``cfg.jobs`` threads; repetitions within a row
    always run back to back.
    """
    tasks = []
    for label, A, x, b in _load_sources(cfg):
        est = cond2(A, cfg.adam.with_seed(cfg.seed), cfg.restarts)
        tasks.extend((label, A, x, b, est, spec) for spec in cfg.solvers)
    if cfg.jobs == 1:
        rows = [_run_row(*t, cfg) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(lambda t: _run_row(*t, cfg), tasks))
    return BenchReport(rows, cfg)


def report_schema():
    """Field names and meanings of a report row."""
    return dict(zip(FIELDS, (
        "matrix label or file path", "solver label", "dimension", "stored entries",
        "estimated 2-norm condition number", "estimated 2-norm of A", "timed solves",
        "sum of solve times (s)", "bootstrap CI of the total, low", "bootstrap CI of the total, high",
        "median solve time (s)", "bootstrap CI of the median, low",
        "bootstrap CI of the median, high",
        "solver iterations", "solver convergence flag", "||A x - b|| / ||b||",
        "lower bound on ||x_hat - x|| / ||x||", "upper bound on ||x_hat - x|| / ||x||",
        "lower bound on ||x_hat - x|| / ||x_hat||", "upper bound on ||x_hat - x|| / ||x_hat||",
        "upper bound on ||x_hat - x|| / ||x|| from the tight bound",
        "roundoff-only error bound", "accepted / rejected / numerically_singular / error",
        "measured ||x_hat - x|| / ||x||", "measured ||x_hat - x|| / ||x_hat||",
        "failure message, empty on success",
    )))
