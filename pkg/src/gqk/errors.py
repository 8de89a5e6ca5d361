"""Exception hierarchy shared by every module."""


class GQKError(Exception):
    """Base class for all errors raised by gqk."""


class ChartMismatch(GQKError):
    pass


class UnknownCoordinate(GQKError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class ParityViolation(GQKError):
    pass


class WeightViolation(GQKError):
    pass


class NonInvertibleDensity(GQKError):
    pass


class ProvenanceMismatch(GQKError):
    pass


class BaseMismatch(GQKError):
    pass


class ParseError(GQKError):
    """Syntax or semantic error in a gqk document, with 1-based position."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
