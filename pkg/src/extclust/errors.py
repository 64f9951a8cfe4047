"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A model or experiment parameter is outside its admissible range."""


class DimensionError(ValueError):
    """An operation defined for univariate data received d != 1 input."""


class DomainError(ValueError):
    """An input violates a mathematical precondition (support, monotonicity, ...)."""


class InsufficientDataError(RuntimeError):
    """Too few exceedances / clusters / blocks to run an estimator.

    Carries the observed count so callers can report how far short the
    data fell.
    """

    def __init__(self, message, count):
        super().__init__(f"{message} (got {count})")
        self.count = count


class UnsupportedParameterError(ValueError):
    """A parameter value at which the requested quantity degenerates."""
