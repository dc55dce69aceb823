"""Exception hierarchy.

Data problems (bad files, degenerate columns, too few rows) derive from
:class:`DataError`; failures of the numerical procedures derive from
:class:`NumericalError`. Plain argument mistakes raise ``ValueError``.
"""


class StabtuneError(Exception):
    pass


class DataError(StabtuneError):
    pass


class SchemaError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class DegenerateColumnError(DataError):
    def __init__(self, column):
        super().__init__(f"column {column!r} has zero variance and cannot be standardized")
        self.column = column


class TooFewRowsError(DataError):
    pass


class SaturatedModelError(DataError):
    """The all-variables OLS fit needed for sigma^2 is unavailable (n <= p or rank deficient)."""


class FoldSizeError(DataError):
    pass


class NumericalError(StabtuneError):
    pass


class RankError(NumericalError):
    pass


class DivergenceError(NumericalError):
    pass


class NoStableModelError(NumericalError):
    """The maximum averaged stability is not positive, so the ratio rule is undefined."""


class DomainError(NumericalError, ArithmeticError):
    """A criterion formula is undefined at its inputs (log of a non-positive SSE, df = n)."""
