"""Exception hierarchy shared by the library and the CLI."""


class LcvError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(LcvError, ValueError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NotPsd(ValidationError):
    pass


class EmptyCone(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class UnsupportedDiagnostic(LcvError):
    """Diagnostic requested for a cone block it does not cover."""


class SingularSystem(LcvError):
    pass


class NonConvergence(LcvError):
    """An iterative method hit its iteration cap.

    ``best`` carries whatever partial result the method had.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class MaxIterExceeded(NonConvergence):
    pass
