"""Exception types shared across the package."""


class BondformError(Exception):
    """Base class for all errors raised by bondform."""


class DomainError(BondformError, ValueError):
    """An input violates a documented precondition."""


class ConvergenceError(BondformError, ArithmeticError):
    """An iterative solver exhausted its iteration budget."""


class SingularDesignError(DomainError):
    """A regression design matrix is rank deficient or degenerate."""


class SchemaError(BondformError, ValueError):
    """A data file violates the series schema.

    Carries file / row / column coordinates so callers can point users at
    the offending cell.
    """

    def __init__(self, message, *, path=None, row=None, column=None):
        self.path = path
        self.row = row
        self.column = column
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
