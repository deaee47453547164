"""Exception types shared across the package."""


class CharonError(Exception):
    """Base class for every error raised by this package."""


class InputError(CharonError, ValueError):
    """Bad argument: wrong dimension, out-of-range value, malformed config."""


class ParseError(CharonError, ValueError):
    """A network, property or policy file could not be parsed."""

    def __init__(self, message, layer=None):
        if layer is not None:
            message = f"layer {layer}: {message}"
        super().__init__(message)
        self.layer = layer


class PreconditionError(CharonError, ValueError):
    pass


class VersionError(CharonError, ValueError):
    pass


class NumericError(CharonError, ArithmeticError):
    """A numerical routine failed (e.g. Cholesky after jitter escalation)."""

    def __init__(self, message, context=None):
        super().__init__(message)
        self.context = context
