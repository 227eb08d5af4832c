"""Exception types shared across the package."""


class ThresholdQError(Exception):
    """Base class for all package-specific errors."""


class DomainError(ThresholdQError, ValueError):
    """A parameter is outside its admissible domain (non-positive rate, negative K, ...)."""


class StabilityError(ThresholdQError, ValueError):
    """The queue is unstable: the arrival rate is not below the high service rate."""


class RegimeError(ThresholdQError, ValueError):
    """Inspection rate and regime tag are inconsistent."""


class ConvergenceError(ThresholdQError, RuntimeError):
    """An iterative scheme failed to converge within its iteration budget."""


class SingularSystemError(ThresholdQError, RuntimeError):
    """A linear system that should be regular is numerically singular."""


class SingularMatrixError(ThresholdQError, RuntimeError):
    """A matrix that should be invertible is numerically singular."""


class SpectralRadiusError(ThresholdQError, ValueError):
    """A spectral-radius precondition for a series solver is violated."""


class AccuracyWarning(UserWarning):
    """The inversion error estimate exceeds the requested target accuracy."""
