"""Regenerate ``frozen.json``: reference values computed independently of the
code under test (dense LAPACK SVD, exact rational arithmetic, brute-force
bootstrap), then frozen so the suite always compares against fixed numbers.

    python3 tests/oracles/make_oracles.py
"""

import json
import os
import sys
from fractions import Fraction

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.dirname(HERE))

from _fixtures import SVD_CASES, constructed_svd, laplacian_2d  # noqa: E402
from sparsecond.bench import GeneratorSpec, generate_illconditioned  # noqa: E402

EPS = Fraction(1, 2 ** 53)


def exact_singularity_bound(kappa):
    k = Fraction(kappa)
    if k * EPS >= 1:
        return "inf"
    return float(2 * EPS * k / (1 - k * EPS))


def main():
    out = {}
    out["svd_cases"] = []
    for n, k, seed in SVD_CASES:
        a, s = constructed_svd(n, k, seed)
        sv = np.linalg.svd(a, compute_uv=False)
        out["svd_cases"].append({"n": n, "kappa_nominal": k, "seed": seed,
                                 "kappa_construction": float(s[0] / s[-1]),
                                 "kappa_lapack": float(sv[0] / sv[-1])})

    A = generate_illconditioned(GeneratorSpec(n=50)).to_dense()
    As = A / np.linalg.norm(A, axis=0)
    out["generator_n50"] = {"kappa": float(np.linalg.cond(A)), "kappa_scaled": float(np.linalg.cond(As))}

    A = generate_illconditioned(GeneratorSpec(n=100)).to_dense()
    norms = np.sqrt((A * A).sum(axis=0))
    out["generator_n100_fraction_below_0.1"] = float(np.mean(norms < 1e-1))

    A = generate_illconditioned(GeneratorSpec(n=200)).to_dense()
    out["generator_n200_kappa"] = float(np.linalg.cond(A))

    rng = np.random.default_rng(987654321)
    x = np.arange(1.0, 101.0)
    stats = np.empty(1_000_000)
    for lo in range(0, stats.shape[0], 50_000):
        idx = rng.integers(0, 100, size=(50_000, 100))
        stats[lo:lo + 50_000] = np.median(x[idx], axis=1)
    out["bootstrap_1_100"] = [float(np.quantile(stats, 0.025)), float(np.quantile(stats, 0.975))]

    out["laplacian_10_kappa"] = float(np.linalg.cond(laplacian_2d(10).to_dense()))

    kappas = [1.0, 2.0, 10.0, 1e3, 1e8, 1e12, 1e15, 4503599627370495.0, 9007199254740991.0,
              9007199254740992.0, 9007199254740993.0, 1e16, 1e20]
    out["singularity_bound"] = [[k, exact_singularity_bound(k)] for k in kappas]

    with open(os.path.join(HERE, "frozen.json"), "w") as fh:
        json.dump(out, fh, indent=1)


if __name__ == "__main__":
    main()
