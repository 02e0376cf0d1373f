import numpy as np
import pytest

from sparsecond import _backend, _pykernels
from sparsecond.factorization import lu_factorize, lu_solve, lu_transpose_solve, ilu0
from sparsecond.sparse import matvec, transpose_matvec

from _fixtures import random_sparse

both = pytest.mark.skipif("cython" not in _backend.available(),
                          reason="compiled kernels not built")


def test_selection_prefers_compiled():
    names = _backend.available()
    assert names[-1] == "python"
    assert _backend.active() == names[0]


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.get("fortran")


def test_matvec_against_dense(backend):
    A, a = random_sparse(40, 0.2, 1, ncols=30)
    x = np.random.default_rng(2).standard_normal(30)
    y = np.random.default_rng(3).standard_normal(40)
    np.testing.assert_allclose(matvec(A, x), a @ x, rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(transpose_matvec(A, y), a.T @ y, rtol=1e-13, atol=1e-13)


def test_matvec_sums_in_stored_order(backend):
    # 1e16 + 1 - 1e16 is 0 left to right, 1 in other orders
    from sparsecond import SparseMatrix
    A = SparseMatrix(1, 3, [0, 3], [0, 1, 2], [1e16, 1.0, -1e16])
    assert matvec(A, np.ones(3))[0] == 0.0


def test_triangular_solves(backend):
    A, a = random_sparse(50, 0.1, 4, diag=3.0)
    b = np.random.default_rng(5).standard_normal(50)
    F = lu_factorize(A)
    np.testing.assert_allclose(a @ lu_solve(F, b), b, atol=1e-12)
    np.testing.assert_allclose(a.T @ lu_transpose_solve(F, b), b, atol=1e-12)


@both
def test_backends_agree():
    A, _ = random_sparse(80, 0.08, 6, diag=0.3)
    x = np.random.default_rng(7).standard_normal(80)
    got = {}
    for name in ("cython", "python"):
        prev = _backend.active()
        _backend.use_backend(name)
        try:
            F = lu_factorize(A)
            M = ilu0(A)
            got[name] = dict(mv=matvec(A, x), rmv=transpose_matvec(A, x),
                             L=F.L.values, U=F.U.values, perm=F.row_perm, ilu=M.U.values,
                             sol=lu_solve(F, x), tsol=lu_transpose_solve(F, x),
                             isol=lu_solve(M, x))
        finally:
            _backend.use_backend(prev)
    c, p = got["cython"], got["python"]
    for key in ("mv", "rmv", "L", "U", "perm", "ilu"):
        assert np.array_equal(c[key], p[key]), key
    for key in ("sol", "tsol", "isol"):
        np.testing.assert_allclose(c[key], p[key], rtol=1e-12, atol=1e-12 * np.abs(p[key]).max())


def test_status_codes_shared():
    k = _backend.get()
    assert (k.OK, k.STRUCTURAL, k.NUMERICAL) == (_pykernels.OK, _pykernels.STRUCTURAL,
                                                   _pykernels.NUMERICAL)


def test_fallback_when_extension_missing():
    import subprocess
    import sys
    code = (
        "import sys\n"
        "class Block:\n"
        "    def find_spec(self, name, path=None, target=None):\n"
        "        if name == 'sparsecond._ckernels':\n"
        "            raise ImportError('blocked')\n"
        "sys.meta_path.insert(0, Block())\n"
        "import sparsecond, numpy as np\n"
        "assert sparsecond.active_backend() == 'python', sparsecond.active_backend()\n"
        "assert sparsecond.available_backends() == ['python']\n"
        "A = sparsecond.SparseMatrix.diag([2.0, 4.0])\n"
        "print(sparsecond.cond2(A).kappa)\n"
    )
    r = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert abs(float(r.stdout) - 2.0) < 1e-10


def test_kernel_benchmark_runs():
    import os
    import subprocess
    import sys
    script = os.path.join(os.path.dirname(__file__), "..", "benchmarks", "bench_kernels.py")
    r = subprocess.run([sys.executable, script, "--n", "40", "--repeats", "1"],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    lines = r.stdout.splitlines()
    assert lines[0].startswith("operation,backend")
    assert any(",python," in line for line in lines[1:])
