"""Exception types shared across the package."""


class DynLPAError(Exception):
    """Base class for all package errors."""


class ParameterError(DynLPAError, ValueError):
    """An argument or configuration value is outside its valid domain."""


class ExpressionError(ParameterError):
    """A probability expression failed to parse.

    ``position`` is the 0-based character offset where parsing stopped.
    """

    def __init__(self, message, text="", position=0):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


class InvariantViolation(DynLPAError, RuntimeError):
    """An internal consistency check failed."""
