"""Sojourn-time analysis of a single-server queue with threshold-controlled
service rate and delayed rate inspection.

The service rate is mu0 at queue lengths up to K and mu1 above; the switch
happens instantly (continuous inspection) or at exponential / Erlang-2
inspection epochs. The package computes the stationary queue-length
distribution, the sojourn-time Laplace transform, its numerical inversion to
density and CDF, exact means, and runs an independent discrete-event
simulation for validation.
"""

from .errors import (AccuracyWarning, ConvergenceError, DomainError, RegimeError,
                     SingularMatrixError, SingularSystemError, SpectralRadiusError,
                     StabilityError, ThresholdQError)
from .inversion import DensityCurve, InversionConfig, invert_density, moment
from .model import QueueParams, Regime, TaggedPosition, validate
from .simulator import SimConfig, SimResult, backend, empirical_vs_transform, simulate
from .sojourn_continuous import mean_sojourn_continuous, sojourn_lt_continuous
from .sojourn_inspection import (erlang2_pipeline, mean_sojourn_inspection,
                                 sojourn_lt_inspection)
from .stationary import (StationaryScalar, StationaryVector, boundary_probabilities,
                         r_matrix, r_matrix_erlang2, r_matrix_exponential,
                         r_matrix_iterative, rate_matrices, stationary_continuous,
                         stationary_inspection)

__version__ = "0.1.0"


def sojourn_lt(params: QueueParams, s):
    """Stationary sojourn-time Laplace transform, dispatched on the regime."""
    if params.regime is Regime.CONTINUOUS:
        return sojourn_lt_continuous(params, s)
    return sojourn_lt_inspection(params, s)


def mean_sojourn(params: QueueParams) -> float:
    """Exact mean stationary sojourn time, dispatched on the regime."""
    if params.regime is Regime.CONTINUOUS:
        return mean_sojourn_continuous(params)
    return mean_sojourn_inspection(params)


__all__ = [
    "AccuracyWarning", "ConvergenceError", "DensityCurve", "DomainError",
    "InversionConfig", "QueueParams", "Regime", "RegimeError", "SimConfig",
    "SimResult", "SingularMatrixError", "SingularSystemError",
    "SpectralRadiusError", "StabilityError", "StationaryScalar",
    "StationaryVector", "TaggedPosition", "ThresholdQError", "backend",
    "boundary_probabilities", "empirical_vs_transform", "erlang2_pipeline",
    "invert_density", "mean_sojourn", "mean_sojourn_continuous",
    "mean_sojourn_inspection", "moment", "r_matrix", "r_matrix_erlang2",
    "r_matrix_exponential", "r_matrix_iterative", "rate_matrices", "simulate",
    "sojourn_lt", "sojourn_lt_continuous", "sojourn_lt_inspection",
    "stationary_continuous", "stationary_inspection", "validate",
]
