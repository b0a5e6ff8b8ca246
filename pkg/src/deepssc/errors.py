"""Exception types shared across the toolkit."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition."""


class IngestionError(ValueError):
    """A data file could not be parsed; message carries row/column context."""


class ConfigError(ValueError):
    """A run configuration file or flag set is malformed."""


class NumericalError(RuntimeError):
    """An iterative routine failed to converge.

    Carries the achieved residual and, when meaningful, the best iterate
    so callers can inspect how close the computation got.
    """

    def __init__(self, message, residual=None, best=None):
        super().__init__(message)
        self.residual = residual
        self.best = best
