"""``sparsecond`` command line: cond, norm, solve, verify, bench, gen.

Results go to standard output as ``key = value`` lines (17 significant
digits) after a ``#`` header that records the effective configuration.
Messages go to standard error.

Exit codes: 0 success or accepted, 2 usage or input error, 3 numerically
singular, 4 verification rejected.
"""

import argparse
import math
import sys

import numpy as np

from . import __version__
from .bench import BenchConfig, GeneratorSpec, generate_system, report_schema, run_bench
from .condest import AdamConfig, cond2, inv_norm2, norm2
from .error_analysis import (ACCEPTED, DEFAULT_THRESHOLD, EPS_MACH, NUMERICALLY_SINGULAR,
                             is_numerically_singular, singularity_bound, verify_solution)
from .exceptions import SingularMatrix, SparseCondError, ZeroRow
from .factorization import DEFAULT_PIVOT_TOL, lu_factorize, lu_solve
from .matio import read_matrix_market, read_vector, write_matrix_market, write_vector
from .solvers import KINDS, PRECONDITIONERS, SCALINGS, SolverSpec, solve
from .sparse import column_scale, matvec, row_norms, two_norm

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SINGULAR = 3
EXIT_REJECTED = 4


class InputError(Exception):
    pass


def _fmt(v):
    if isinstance(v, bool) or v is None:
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def _emit(out, key, value):
    out.write(f"{key} = {_fmt(value)}\n")


def _header(out, args, extra=()):
    out.write(f"# sparsecond {__version__} {args.command}\n")
    for k, v in sorted(vars(args).items()):
        if k not in ("command", "func"):
            out.write(f"# {k} = {_fmt(v)}\n")
    for k, v in extra:
        out.write(f"# {k} = {_fmt(v)}\n")


def _adam_flags(p):
    g = p.add_argument_group("projected Adam")
    d = AdamConfig()
    g.add_argument("--alpha", type=float, default=d.alpha)
    g.add_argument("--beta1", type=float, default=d.beta1)
    g.add_argument("--beta2", type=float, default=d.beta2)
    g.add_argument("--eps-stab", type=float, default=d.eps_stab)
    g.add_argument("--max-iter", type=int, default=d.max_iter)
    g.add_argument("--patience", type=int, default=d.patience)
    g.add_argument("--restarts", type=int, default=3,
                   help="seeded runs per norm; the best is kept")


def _adam(args):
    return AdamConfig(alpha=args.alpha, beta1=args.beta1, beta2=args.beta2,
                      eps_stab=args.eps_stab, max_iter=args.max_iter, seed=args.seed,
                      patience=args.patience)


def _solver_flags(p):
    g = p.add_argument_group("solver")
    d = SolverSpec()
    g.add_argument("--kind", choices=KINDS, default=d.kind)
    g.add_argument("--tol", type=float, default=d.tol)
    g.add_argument("--solver-max-iter", type=int, default=d.max_iter)
    g.add_argument("--restart", type=int, default=d.restart)
    g.add_argument("--precond", choices=PRECONDITIONERS, default=d.precond)
    g.add_argument("--scaling", choices=SCALINGS, default=d.scaling)
    g.add_argument("--pivot-tol", type=float, default=DEFAULT_PIVOT_TOL)


def _solver_spec(args):
    return SolverSpec(kind=args.kind, tol=args.tol, max_iter=args.solver_max_iter,
                      restart=args.restart, precond=args.precond, scaling=args.scaling,
                      pivot_tol=args.pivot_tol)


def _square(path):
    A = read_matrix_market(path)
    if A.nrows != A.ncols:
        raise InputError(f"{path}: square matrix required, got {A.nrows}x{A.ncols}")
    return A


def _vector(path, n, what):
    v = read_vector(path)
    if v.shape[0] != n:
        raise InputError(f"{path}: {what} has length {v.shape[0]}, expected {n}")
    return v


def _scaled(A, how):
    if how == "column":
        return column_scale(A)[0]
    if how == "row":
        norms = row_norms(A)
        zero = np.nonzero(norms == 0)[0]
        if zero.shape[0]:
            raise ZeroRow(int(zero[0]))
        return A.scale_rows(1.0 / norms)
    return A


def cmd_cond(args, out):
    A = _scaled(_square(args.matrix), args.scale)
    cfg = _adam(args)
    _header(out, args, [("eps_mach", EPS_MACH)])
    try:
        F = lu_factorize(A, args.pivot_tol)
    except SingularMatrix:
        F = None
    est = cond2(A, cfg, args.restarts, args.pivot_tol, factors=F)
    nrm = est.norm
    _emit(out, "kappa2", est.kappa)
    _emit(out, "norm2", nrm.value)
    _emit(out, "norm2_iterations", nrm.iterations)
    _emit(out, "norm2_witness_check", abs(two_norm(matvec(A, nrm.witness)) - nrm.value))
    inv = est.inv_norm
    _emit(out, "inv_norm2", math.inf if inv is None else inv.value)
    if inv is not None and est.singular_reason is None:
        _emit(out, "inv_norm2_iterations", inv.iterations)
        _emit(out, "inv_norm2_witness_check",
              abs(two_norm(lu_solve(F, inv.witness)) - inv.value))
    singular = is_numerically_singular(est.kappa)
    _emit(out, "singularity_bound", singularity_bound(est.kappa))
    _emit(out, "numerically_singular", singular)
    if est.singular_reason:
        print(f"factorization failed: {est.singular_reason}", file=sys.stderr)
    return EXIT_SINGULAR if singular else EXIT_OK


def cmd_norm(args, out):
    A = read_matrix_market(args.matrix)
    cfg = _adam(args)
    _header(out, args)
    if args.inverse:
        if A.nrows != A.ncols:
            raise InputError("the inverse norm needs a square matrix")
        est = inv_norm2(lu_factorize(A, args.pivot_tol), cfg, args.restarts)
        _emit(out, "inv_norm2", est.value)
    else:
        est = norm2(A, cfg, args.restarts)
        _emit(out, "norm2", est.value)
    _emit(out, "iterations", est.iterations)
    _emit(out, "converged", est.converged)
    if args.witness:
        write_vector(est.witness, args.witness, comment="norm witness")
    return EXIT_OK


def cmd_solve(args, out):
    A = _square(args.matrix)
    b = _vector(args.rhs, A.nrows, "right-hand side")
    spec = _solver_spec(args)
    _header(out, args, [("solver", spec.label)])
    res = solve(A, b, spec)
    _emit(out, "iterations", res.iterations)
    _emit(out, "relative_residual", res.relative_residual)
    _emit(out, "converged", res.converged)
    _emit(out, "wall_time", res.wall_time)
    if res.breakdown:
        _emit(out, "breakdown", res.breakdown.replace(" ", "_"))
    if args.out:
        write_vector(res.x, args.out, comment=f"solution by {spec.label}")
    else:
        write_vector(res.x, out)
    if not res.converged:
        print(f"{spec.label} did not reach tol {spec.tol:g}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args, out):
    A = _square(args.matrix)
    b = _vector(args.rhs, A.nrows, "right-hand side")
    x = _vector(args.solution, A.ncols, "solution")
    _header(out, args)
    rep = verify_solution(A, x, b, kappa=args.kappa, threshold=args.threshold,
                          cfg=_adam(args), restarts=args.restarts)
    for k, v in rep.to_record().items():
        _emit(out, k, v)
    print(f"verdict: {rep.verdict}", file=sys.stderr)
    if rep.verdict == NUMERICALLY_SINGULAR:
        return EXIT_SINGULAR
    return EXIT_OK if rep.verdict == ACCEPTED else EXIT_REJECTED


def _gen_spec(args, n=None):
    return GeneratorSpec(n=args.n if n is None else n, small_col_fraction=args.small_fraction,
                         small_scale=args.small_scale, large_scale=args.large_scale,
                         density=args.density, coupling=args.coupling, seed=args.seed,
                         balanced_solution=not args.uniform_solution)


def cmd_gen(args, out):
    spec = _gen_spec(args)
    _header(out, args)
    A, x, b = generate_system(spec)
    write_matrix_market(A, args.matrix, comment=spec.label)
    if args.rhs:
        write_vector(b, args.rhs, comment="b = A x_true")
    if args.solution:
        write_vector(x, args.solution, comment="x_true")
    _emit(out, "n", A.nrows)
    _emit(out, "nnz", A.nnz)
    return EXIT_OK


def cmd_bench(args, out):
    solvers = [SolverSpec.parse(s) for s in (args.solver or ["direct_lu"])]
    gens = [_gen_spec(args, n) for n in (args.n or [])] if not args.matrix or args.n else []
    cfg = BenchConfig(generators=gens, files=list(args.matrix or []), solvers=solvers,
                      repetitions=args.repetitions, bootstrap_samples=args.bootstrap,
                      seed=args.seed, threshold=args.threshold, adam=_adam(args),
                      restarts=args.restarts, jobs=args.jobs)
    if not cfg.generators and not cfg.files:
        raise InputError("bench needs --n or --matrix")
    _header(out, args)
    if args.schema:
        for k, v in report_schema().items():
            out.write(f"# column {k}: {v}\n")
    report = run_bench(cfg)
    if args.jsonl:
        report.to_jsonl(args.jsonl)
    if args.csv:
        report.to_csv(args.csv)
    else:
        out.write(report.to_csv())
    for row in report.rows:
        if row["error"]:
            print(f"{row['matrix']} / {row['solver']}: {row['error']}", file=sys.stderr)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="sparsecond",
                                description="Condition numbers and error bounds for sparse systems.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cond", help="estimate the 2-norm condition number")
    c.add_argument("--matrix", required=True)
    c.add_argument("--scale", choices=SCALINGS, default="none")
    c.add_argument("--pivot-tol", type=float, default=DEFAULT_PIVOT_TOL)
    c.add_argument("--seed", type=int, default=0)
    _adam_flags(c)
    c.set_defaults(func=cmd_cond)

    nm = sub.add_parser("norm", help="estimate ||A||_2 or ||inv(A)||_2")
    nm.add_argument("--matrix", required=True)
    nm.add_argument("--inverse", action="store_true")
    nm.add_argument("--witness", help="write the maximizing unit vector here")
    nm.add_argument("--pivot-tol", type=float, default=DEFAULT_PIVOT_TOL)
    nm.add_argument("--seed", type=int, default=0)
    _adam_flags(nm)
    nm.set_defaults(func=cmd_norm)

    s = sub.add_parser("solve", help="solve A x = b")
    s.add_argument("--matrix", required=True)
    s.add_argument("--rhs", required=True)
    s.add_argument("--out", help="solution vector file (default: standard output)")
    s.add_argument("--seed", type=int, default=0)
    _solver_flags(s)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="bound the error of an approximate solution")
    v.add_argument("--matrix", required=True)
    v.add_argument("--rhs", required=True)
    v.add_argument("--solution", required=True)
    v.add_argument("--kappa", type=float)
    v.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    v.add_argument("--seed", type=int, default=0)
    _adam_flags(v)
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gen", help="generate an ill-conditioned test system")
    g.add_argument("--n", type=int, default=200)
    g.add_argument("--matrix", required=True, help="output Matrix Market file")
    g.add_argument("--rhs")
    g.add_argument("--solution")
    g.add_argument("--seed", type=int, default=0)
    _gen_flags(g)
    g.set_defaults(func=cmd_gen)

    bn = sub.add_parser("bench", help="time solvers and bound their errors")
    bn.add_argument("--n", type=int, action="append", help="generated matrix size (repeatable)")
    bn.add_argument("--matrix", action="append", help="Matrix Market file (repeatable)")
    bn.add_argument("--solver", action="append",
                    help="kind[,precond=..][,scaling=..][,tol=..][,max_iter=..] (repeatable)")
    bn.add_argument("--repetitions", type=int, default=5)
    bn.add_argument("--bootstrap", type=int, default=1000)
    bn.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    bn.add_argument("--jobs", type=int, default=1)
    bn.add_argument("--csv")
    bn.add_argument("--jsonl")
    bn.add_argument("--schema", action="store_true", help="describe the columns in the header")
    bn.add_argument("--seed", type=int, default=0)
    _gen_flags(bn)
    _adam_flags(bn)
    bn.set_defaults(func=cmd_bench)
    return p


def _gen_flags(p):
    g = p.add_argument_group("generator")
    d = GeneratorSpec()
    g.add_argument("--small-fraction", type=float, default=d.small_col_fraction)
    g.add_argument("--small-scale", type=float, default=d.small_scale)
    g.add_argument("--large-scale", type=float, default=d.large_scale)
    g.add_argument("--density", type=float, default=d.density)
    g.add_argument("--coupling", type=float, default=d.coupling)
    g.add_argument("--uniform-solution", action="store_true",
                   help="draw x_true uniform in [-1, 1] instead of balancing it per column")


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args, out)
    except SingularMatrix as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (SparseCondError, InputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
