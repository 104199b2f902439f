"""Exception types raised across the package."""


class SketchSolveError(Exception):
    """Base class for all package errors."""


class InputError(SketchSolveError, ValueError):
    """Malformed or out-of-domain input (bad shape, non-finite data, ...)."""


class ContractViolation(SketchSolveError, ValueError):
    """A documented precondition on a mathematical object does not hold."""


class ParseError(InputError):
    """A data file could not be parsed.

    Attributes
    ----------
    line : int or None
        1-based line number of the offending row, when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DivergenceError(SketchSolveError, RuntimeError):
    """An iterative solver produced a non-finite or exploding residual.

    Attributes
    ----------
    report : SolveReport
        Partial report whose ``solution`` is the last finite iterate.
    """

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report
