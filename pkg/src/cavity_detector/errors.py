"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the region where a formula or worldline is defined."""


class AccuracyError(ArithmeticError):
    """A numerical routine could not meet its requested accuracy.

    ``best`` carries the best estimate obtained before giving up.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class TruncationError(AccuracyError):
    """The mode sum did not converge within the allowed number of modes."""
