import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from sparsecond import SparseMatrix
from sparsecond.exceptions import ParseError, UnsupportedFormat
from sparsecond.matio import (read_matrix_market, read_vector, write_matrix_market,
                              write_vector)

from _fixtures import laplacian_2d, random_sparse

HDR = "%%MatrixMarket matrix coordinate real general\n"


def read(text):
    return read_matrix_market(io.StringIO(text))


def test_diagonal_example():
    A = read(HDR + "2 2 2\n1 1 1.0\n2 2 2.0\n")
    np.testing.assert_array_equal(A.to_dense(), np.diag([1.0, 2.0]))


def test_symmetric_expansion():
    A = read("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1\n2 1 5\n")
    np.testing.assert_array_equal(A.to_dense(), [[1.0, 5.0], [5.0, 0.0]])


def test_duplicates_summed_and_comments():
    A = read(HDR + "% comment\n\n2 2 3\n1 1 1.0\n1 1 2.5\n2 1 -1\n")
    np.testing.assert_array_equal(A.to_dense(), [[3.5, 0.0], [-1.0, 0.0]])


def test_integer_field_and_array_format():
    A = read("%%MatrixMarket matrix array integer general\n2 2\n1\n2\n3\n4\n")
    np.testing.assert_array_equal(A.to_dense(), [[1.0, 3.0], [2.0, 4.0]])
    S = read("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n")
    np.testing.assert_array_equal(S.to_dense(), [[1.0, 2.0], [2.0, 3.0]])


@pytest.mark.parametrize("banner", [
    "%%MatrixMarket matrix coordinate complex general",
    "%%MatrixMarket matrix coordinate pattern general",
    "%%MatrixMarket matrix coordinate real hermitian",
    "%%MatrixMarket matrix coordinate real skew-symmetric",
    "%%MatrixMarket vector coordinate real general",
])
def test_unsupported(banner):
    with pytest.raises(UnsupportedFormat):
        read(banner + "\n1 1 1\n1 1 1\n")


@pytest.mark.parametrize("text,line", [
    ("not a banner\n", 1),
    (HDR + "2 2\n", 2),
    (HDR + "2 2 1\n3 1 1.0\n", 3),
    (HDR + "2 2 1\n1 1 abc\n", 3),
    (HDR + "2 2 2\n1 1 1.0\n", 4),
    (HDR + "2 2 1\n1 1 1.0\n2 2 2.0\n", 4),
    ("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1.0\n", 3),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as e:
        read(text)
    assert e.value.line == line


def test_round_trip_fixtures(tmp_path):
    fixtures = [random_sparse(10, 0.4, s)[0] for s in range(5)]
    fixtures += [laplacian_2d(4), SparseMatrix.identity(3),
                 SparseMatrix(2, 3, [0, 2, 3], [0, 2, 1], [0.0, -0.0, 1e-310])]
    for A in fixtures:
        assert read(write_matrix_market(A)) == A
        path = tmp_path / "a.mtx"
        write_matrix_market(A, path)
        assert read_matrix_market(path) == A


@settings(max_examples=50, deadline=None)
@given(hnp.arrays(np.float64, (10, 10), elements=st.floats(allow_nan=False, allow_infinity=False)),
       hnp.arrays(np.bool_, (10, 10)))
def test_round_trip_bit_exact(a, mask):
    A = SparseMatrix.from_dense(np.where(mask, a, 0.0))
    assert read(write_matrix_market(A)) == A


def test_write_rejects_empty():
    with pytest.raises(ValueError):
        write_matrix_market(SparseMatrix(0, 0, [0], [], []))


def test_write_stored_order():
    A = SparseMatrix.from_dense([[0.0, 2.0], [3.0, 4.0]])
    lines = write_matrix_market(A).splitlines()
    assert lines[1:] == ["2 2 3", "1 2 2", "2 1 3", "2 2 4"]


def test_vector_round_trip(tmp_path):
    assert read_vector(io.StringIO(write_vector([1.5]))).tolist() == [1.5]
    v = np.random.default_rng(0).standard_normal(20) * 1e-7
    path = tmp_path / "v.txt"
    write_vector(v, path, comment="header")
    assert np.array_equal(read_vector(path), v)
    assert read_vector(io.StringIO("# c\n1.0  # tail\n\n2\n")).tolist() == [1.0, 2.0]
    with pytest.raises(ParseError):
        read_vector(io.StringIO("1 2\n"))
