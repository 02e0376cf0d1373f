"""Matrix Market (coordinate and array, real or integer) and plain vector files.

Values are written with 17 significant digits, so reading back a written
matrix reproduces every stored double exactly.
"""

import io
import os
from dataclasses import dataclass

import numpy as np

from .exceptions import ParseError, UnsupportedFormat
from .sparse import SparseMatrix

FORMATS = ("coordinate", "array")
FIELDS = ("real", "integer")
SYMMETRIES = ("general", "symmetric")


@dataclass(frozen=True)
class MatrixMarketHeader:
    object: str = "matrix"
    format: str = "coordinate"
    field: str = "real"
    symmetry: str = "general"

    def __str__(self):
        return f"%%MatrixMarket {self.object} {self.format} {self.field} {self.symmetry}"


def _open(source, mode):
    if isinstance(source, (str, os.PathLike)):
        return open(source, mode, encoding="ascii" if "b" not in mode else None), True
    return source, False


def parse_header(line, lineno=1):
    """Parse the banner line; only real/integer general/symmetric matrices pass."""
    parts = line.split()
    if not parts or parts[0].lower() != "%%matrixmarket":
        raise ParseError(lineno, "missing %%MatrixMarket banner")
    if len(parts) != 5:
        raise ParseError(lineno, "banner needs object, format, field and symmetry")
    obj, fmt, fld, sym = (p.lower() for p in parts[1:])
    if obj != "matrix":
        raise UnsupportedFormat(f"object {obj!r} is not supported")
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"format {fmt!r} is not supported")
    if fld not in FIELDS:
        raise UnsupportedFormat(f"field {fld!r} is not supported (real or integer only)")
    if sym not in SYMMETRIES:
        raise UnsupportedFormat(f"symmetry {sym!r} is not supported")
    return MatrixMarketHeader(obj, fmt, fld, sym)


def _data_lines(lines, start):
    for lineno, raw in enumerate(lines, start):
        s = raw.strip()
        if s and not s.startswith("%"):
            yield lineno, s


def _number(tok, lineno, integer):
    try:
        return float(int(tok)) if integer else float(tok)
    except ValueError:
        raise ParseError(lineno, f"bad number {tok!r}") from None


def _index(tok, lineno, bound, what):
    try:
        i = int(tok)
    except ValueError:
        raise ParseError(lineno, f"bad {what} index {tok!r}") from None
    if not 1 <= i <= bound:
        raise ParseError(lineno, f"{what} index {i} outside 1..{bound}")
    return i - 1


def read_matrix_market(source):
    """Read a matrix from a path or text stream.

    Coordinates are converted to 0-based, symmetric storage is expanded and
    duplicate entries are summed.

    Raises
    ------
    ParseError
        Malformed content, with the 1-based line number.
    UnsupportedFormat
        A header combination outside real/integer, general/symmetric.
    """
    fh, owned = _open(source, "r")
    try:
        lines = iter(fh)
        first = next(lines, "")
        hdr = parse_header(first)
        body = _data_lines(lines, 2)
        try:
            lineno, size = next(body)
        except StopIteration:
            raise ParseError(2, "missing size line") from None
        dims = size.split()
        want = 3 if hdr.format == "coordinate" else 2
        if len(dims) != want:
            raise ParseError(lineno, f"size line needs {want} integers")
        try:
            dims = [int(d) for d in dims]
        except ValueError:
            raise ParseError(lineno, "size line must hold integers") from None
        if any(d < 0 for d in dims):
            raise ParseError(lineno, "negative size")
        nrows, ncols = dims[0], dims[1]
        if hdr.symmetry == "symmetric" and nrows != ncols:
            raise ParseError(lineno, "symmetric matrix must be square")
        integer = hdr.field == "integer"
        if hdr.format == "coordinate":
            rows, cols, vals = _read_coordinate(body, hdr, nrows, ncols, dims[2], integer)
        else:
            rows, cols, vals = _read_array(body, hdr, nrows, ncols, integer)
    finally:
        if owned:
            fh.close()
    if hdr.symmetry == "symmetric":
        off = rows != cols
        rows, cols, vals = (np.concatenate([rows, cols[off]]), np.concatenate([cols, rows[off]]),
                            np.concatenate([vals, vals[off]]))
    return SparseMatrix.from_coo(nrows, ncols, rows, cols, vals)


def _read_coordinate(body, hdr, nrows, ncols, nnz, integer):
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    k = 0
    lineno = 2
    for lineno, s in body:
        if k == nnz:
            raise ParseError(lineno, f"more than the declared {nnz} entries")
        tok = s.split()
        if len(tok) != 3:
            raise ParseError(lineno, "coordinate entry needs row, column and value")
        i = _index(tok[0], lineno, nrows, "row")
        j = _index(tok[1], lineno, ncols, "column")
        if hdr.symmetry == "symmetric" and j > i:
            raise ParseError(lineno, "symmetric storage must hold the lower triangle only")
        rows[k], cols[k], vals[k] = i, j, _number(tok[2], lineno, integer)
        k += 1
    if k != nnz:
        raise ParseError(lineno + 1, f"expected {nnz} entries, found {k}")
    return rows, cols, vals


def _read_array(body, hdr, nrows, ncols, integer):
    # column-major; symmetric arrays list the lower triangle only
    if hdr.symmetry == "symmetric":
        pos = [(i, j) for j in range(ncols) for i in range(j, nrows)]
    else:
        pos = [(i, j) for j in range(ncols) for i in range(nrows)]
    vals = np.empty(len(pos))
    k = 0
    lineno = 2
    for lineno, s in body:
        for tok in s.split():
            if k == len(pos):
                raise ParseError(lineno, f"more than the expected {len(pos)} values")
            vals[k] = _number(tok, lineno, integer)
            k += 1
    if k != len(pos):
        raise ParseError(lineno + 1, f"expected {len(pos)} values, found {k}")
    ij = np.array(pos, dtype=np.int64).reshape(-1, 2)
    return ij[:, 0], ij[:, 1], vals


def _fmt(v):
    return "%.17g" % v


def write_matrix_market(A, target=None, comment=None):
    """Write ``A`` in coordinate general format, entries in stored order.

    Returns the text when ``target`` is None, otherwise writes to the path
    or stream and returns None. Explicit zeros are written as stored.
    """
    if A.nrows == 0 or A.ncols == 0:
        raise ValueError("refusing to write an empty matrix")
    out = io.StringIO()
    out.write(f"{MatrixMarketHeader()}\n")
    if comment:
        for line in str(comment).splitlines():
            out.write(f"% {line}\n")
    out.write(f"{A.nrows} {A.ncols} {A.nnz}\n")
    rows = A.row_indices() + 1
    cols = A.col_indices + 1
    out.writelines(f"{i} {j} {_fmt(v)}\n" for i, j, v in zip(rows.tolist(), cols.tolist(),
                                                            A.values.tolist()))
    text = out.getvalue()
    if target is None:
        return text
    fh, owned = _open(target, "w")
    try:
        fh.write(text)
    finally:
        if owned:
            fh.close()
    return None


def read_vector(source):
    """One value per line; blank lines and ``#`` comments are skipped."""
    fh, owned = _open(source, "r")
    try:
        vals = []
        for lineno, raw in enumerate(fh, 1):
            s = raw.split("#", 1)[0].strip()
            if not s:
                continue
            tok = s.split()
            if len(tok) != 1:
                raise ParseError(lineno, "expected one value per line")
            try:
                vals.append(float(tok[0]))
            except ValueError:
                raise ParseError(lineno, f"bad number {tok[0]!r}") from None
    finally:
        if owned:
            fh.close()
    return np.array(vals, dtype=np.float64)


def write_vector(v, target=None, comment=None):
    v = np.asarray(v, dtype=np.float64).ravel()
    lines = [f"# {c}\n" for c in str(comment).splitlines()] if comment else []
    lines += [_fmt(x) + "\n" for x in v.tolist()]
    text = "".join(lines)
    if target is None:
        return text
    fh, owned = _open(target, "w")
    try:
        fh.write(text)
    finally:
        if owned:
            fh.close()
    return None
