"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: input problems exit with 2, numerical
failures with 3.
"""


class CoherenceError(Exception):
    """Base class for all package errors."""

    code = "error"
    exit_status = 1


class ParameterError(CoherenceError, ValueError):
    """Invalid model parameters (J, g, m, beta)."""

    code = "parameter"
    exit_status = 2


class DomainError(CoherenceError, ValueError):
    """An operation was called outside the domain where it is defined."""

    code = "domain"
    exit_status = 2


class ValidationError(CoherenceError, ValueError):
    """A scenario or configuration document failed validation."""

    code = "validation"
    exit_status = 2

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ParseError(CoherenceError, ValueError):
    """A response file could not be parsed.

    ``row`` and ``column`` are 1-based file coordinates (header is row 1).
    """

    code = "parse"
    exit_status = 2

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class NumericalError(CoherenceError, ArithmeticError):
    code = "numerical"
    exit_status = 3


class NonIdentifiableError(NumericalError):
    """Data carry no information about the fitted parameters."""

    code = "non_identifiable"
