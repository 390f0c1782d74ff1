"""Exception types raised across the package."""


class AssgError(Exception):
    """Base class for all package errors."""


class InvalidInputError(AssgError, ValueError):
    """An argument has the wrong shape or an invalid value."""


class ConfigurationError(AssgError, ValueError):
    """A problem, solver or experiment is configured inconsistently."""


class ParseError(AssgError, ValueError):
    """A data file could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalFailure(AssgError, RuntimeError):
    """An iterative numerical routine failed to converge.

    The last iterate is kept on the exception so callers can inspect it.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate
