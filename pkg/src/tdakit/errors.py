"""Exception types shared across the package."""


class TDAError(Exception):
    """Base class for errors raised by tdakit."""


class InputError(TDAError, ValueError):
    """Input failed validation (shape, range, or structural checks)."""


class NumericDomainError(TDAError, ArithmeticError):
    """A computation has no finite answer for otherwise valid input."""
