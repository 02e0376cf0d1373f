"""Exception hierarchy shared by all modules."""


class SparseCondError(Exception):
    """Base class for errors raised by sparsecond."""


class DimensionMismatch(SparseCondError, ValueError):
    pass


class ZeroColumn(SparseCondError):
    def __init__(self, index):
        super().__init__(f"column {index} has zero norm")
        self.index = index


class ZeroRow(SparseCondError):
    def __init__(self, index):
        super().__init__(f"row {index} has zero norm")
        self.index = index


class ZeroDiagonal(SparseCondError):
    def __init__(self, index):
        super().__init__(f"diagonal entry {index} is zero")
        self.index = index


class ZeroPivot(SparseCondError):
    """ILU(0) broke down: a zero (or missing) pivot at ``index``."""

    def __init__(self, index):
        super().__init__(f"ILU(0) breakdown: zero pivot in row {index}")
        self.index = index


class SingularMatrix(SparseCondError):
    """Base for factorization failures."""


class StructurallySingular(SingularMatrix):
    def __init__(self, col):
        super().__init__(f"no admissible pivot in column {col}")
        self.col = col


class NumericallySingular(SingularMatrix):
    def __init__(self, col, pivot):
        super().__init__(f"pivot {pivot:.3e} in column {col} below tolerance")
        self.col = col
        self.pivot = pivot


class DegenerateDirection(SparseCondError, ArithmeticError):
    """The operator maps the current direction to (numerically) zero."""


class ZeroRHS(SparseCondError, ValueError):
    pass


class ZeroSolution(SparseCondError, ValueError):
    pass


class MatrixMarketError(SparseCondError, ValueError):
    pass


class ParseError(MatrixMarketError):
    def __init__(self, line, reason):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class UnsupportedFormat(MatrixMarketError):
    pass
