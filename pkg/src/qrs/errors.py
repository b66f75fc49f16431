"""Exception hierarchy shared by all modules."""


class QRSError(Exception):
    """Base class for every error raised by the package."""


class ZeroToNegativePower(QRSError, ZeroDivisionError):
    pass


class DivisionByZero(QRSError, ZeroDivisionError):
    """A vanishing denominator factor; callers treat it as a cue to resample."""


class DimensionMismatch(QRSError, ValueError):
    pass


class NomeOutOfRange(QRSError, ValueError):
    pass


class SingularDiagonal(QRSError, ValueError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"zero diagonal entry at {index}")


class UnknownIdentity(QRSError, KeyError):
    def __str__(self):
        return f"unknown identity {self.args[0]!r}"


class UnknownReduction(QRSError, KeyError):
    def __str__(self):
        return f"unknown reduction {self.args[0]!r}"


class AdmissiblePointNotFound(QRSError, RuntimeError):
    pass


class NoRegisteredCounterpart(QRSError, LookupError):
    pass


class ConvergenceNotObserved(QRSError, RuntimeError):
    def __init__(self, message, residuals=()):
        super().__init__(message)
        self.residuals = list(residuals)


class ConvergenceConditionViolated(QRSError, ValueError):
    pass


class ConfigError(QRSError, ValueError):
    """Invalid run configuration (CLI exit status 2)."""
