"""Exception hierarchy.

Every error raised deliberately by the library derives from
:class:`FormalDiscError`, and most also derive from :class:`ValueError`
so that callers who only care about bad input can catch that.
"""


class FormalDiscError(Exception):
    pass


class TruncationError(FormalDiscError, ValueError):
    """A requested coefficient lies at or above the known truncation order."""


class NonZeroConstantTerm(FormalDiscError, ValueError):
    pass


class NotInvertible(FormalDiscError, ValueError):
    pass


class NotExponentiable(FormalDiscError, ValueError):
    pass


class NotUnipotent(FormalDiscError, ValueError):
    pass


class FractionalPowerUndefined(FormalDiscError, ValueError):
    pass


class NotNilpotent(FormalDiscError, ValueError):
    pass


class OnDiagonal(FormalDiscError, ValueError):
    pass


class BadRange(FormalDiscError, ValueError):
    pass


class DomainViolation(FormalDiscError, ValueError):
    pass


class ExpansionBudgetExceeded(FormalDiscError, RuntimeError):
    pass


class UnknownTest(FormalDiscError, KeyError):
    pass


class ParseError(FormalDiscError, ValueError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(FormalDiscError, ValueError):
    pass
