"""Compare the compiled and numpy kernel backends on the hot operations.

    python3 benchmarks/bench_kernels.py [--n 400] [--repeats 7]

Prints one CSV row per (operation, backend) with the median wall time and
the speedup of the compiled backend.
"""

import argparse
import statistics
import sys
import time

import numpy as np

import sparsecond as sc
from sparsecond import _backend
from sparsecond.condest import AdamConfig


def timed(fn, repeats):
    ts = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return statistics.median(ts)


def workloads(n):
    A = sc.generate_illconditioned(sc.GeneratorSpec(n=n, seed=1))
    As, _ = sc.column_scale(A)
    x = np.random.default_rng(0).standard_normal(n)
    F = sc.lu_factorize(As)
    cfg = AdamConfig(max_iter=200, patience=10 ** 6)
    return {
        "matvec": lambda: sc.matvec(As, x),
        "transpose_matvec": lambda: sc.transpose_matvec(As, x),
        "lu_factorize": lambda: sc.lu_factorize(As),
        "lu_solve": lambda: sc.lu_solve(F, x),
        "lu_transpose_solve": lambda: sc.lu_transpose_solve(F, x),
        "ilu0": lambda: sc.ilu0(As),
        "inv_norm2_200_iters": lambda: sc.inv_norm2(F, cfg),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--repeats", type=int, default=7)
    args = p.parse_args(argv)
    names = _backend.available()
    if "cython" not in names:
        print("compiled kernels not built; only the numpy backend is available", file=sys.stderr)
    prev = _backend.active()
    times = {}
    try:
        for be in names:
            _backend.use_backend(be)
            for op, fn in workloads(args.n).items():
                fn()  # warm up
                times[op, be] = timed(fn, args.repeats)
    finally:
        _backend.use_backend(prev)
    print("operation,backend,n,median_s,speedup_vs_python")
    for (op, be), t in times.items():
        base = times[op, "python"]
        print(f"{op},{be},{args.n},{t:.6g},{base / t:.2f}")


if __name__ == "__main__":
    main()
