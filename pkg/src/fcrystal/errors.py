"""Exception types shared across the package."""


class CrystalError(ValueError):
    """Malformed or out-of-domain input."""


class PrecisionError(ArithmeticError):
    """The working p-adic precision is too small to determine the answer.

    ``required`` carries the precision the caller should retry with, when known.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class VerificationError(RuntimeError):
    """A computed object failed its own postcondition checks."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
