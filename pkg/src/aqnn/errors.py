"""Exception types raised across the package."""


class AQNNError(Exception):
    """Base class for all errors raised by :mod:`aqnn`."""


class DimensionMismatch(AQNNError, ValueError):
    pass


class NonHermitianInput(AQNNError, ValueError):
    pass


class BadDimension(AQNNError, ValueError):
    pass


class BadRank(AQNNError, ValueError):
    pass


class NotCPTP(AQNNError, ValueError):
    """The channel fails the Choi positivity / trace-preservation test."""


class NotPSD(AQNNError, ValueError):
    pass


class WrongVariant(AQNNError, ValueError):
    pass


class DepthExceeded(AQNNError, RuntimeError):
    pass


class ConstraintInfeasible(AQNNError, ValueError):
    """A structured dilation cannot be built for the given parameters.

    ``diagnostic`` names the constraint that failed.
    """

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic


class DimensionTooLarge(AQNNError, ValueError):
    pass


class SolverDidNotConverge(AQNNError, RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}
