"""Exception types shared across the package."""


class ConvexityError(Exception):
    """Base class for all errors raised by ltgconvex."""


class InvalidSpace(ConvexityError):
    pass


class UnknownPoint(ConvexityError, KeyError):
    pass


class NotLocallyOpen(ConvexityError):
    pass


class NotConnected(ConvexityError):
    pass


class InvalidTable(ConvexityError):
    pass


class AxiomsNotVerified(ConvexityError):
    pass


class NotInChart(ConvexityError):
    pass


class CrossChartUnsupported(ConvexityError):
    pass


class UnsupportedMapKind(ConvexityError):
    pass


class NotCovered(ConvexityError):
    pass


class BudgetExhausted(ConvexityError):
    """Raised when straightening runs out of steps; carries the partial trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ParseError(ConvexityError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class UnknownCheck(ConvexityError):
    pass


class OrderViolation(ConvexityError):
    pass
