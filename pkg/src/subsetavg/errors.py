"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class InsufficientDataError(ParameterError):
    """Too few samples to form the requested estimate."""


class NumericalError(ArithmeticError):
    """A numerical operation failed (singular or indefinite matrix, overflow)."""


class ConvergenceError(NumericalError):
    """An iterative solver hit its iteration cap.

    The last iterate is attached as `last_fit` so callers can inspect or
    report the partial result.
    """

    def __init__(self, message, last_fit=None):
        super().__init__(message)
        self.last_fit = last_fit


class ConfigError(ValueError):
    """A configuration file or option set is malformed or inconsistent."""
