"""Queue parameters, validation, and inspection-regime selection.

The system is a single-server FIFO queue with Poisson arrivals (rate lambda)
and exponential services whose rate is mu0 while the queue length is at or
below a threshold K and mu1 above it. The switching rule is applied either
instantly at every crossing (continuous inspection) or only at random
inspection epochs: exponential(gamma) or Erlang-2(gamma) spaced.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional, Union

from .errors import DomainError, RegimeError, StabilityError


class Regime(enum.Enum):
    CONTINUOUS = "continuous"
    EXPONENTIAL = "exponential"
    ERLANG2 = "erlang2"

    @classmethod
    def coerce(cls, value: Union[str, "Regime"]) -> "Regime":
        if isinstance(value, Regime):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise RegimeError(f"unknown regime {value!r}; expected one of "
                              f"{[r.value for r in cls]}") from None


@dataclass(frozen=True)
class QueueParams:
    """Immutable parameter set. `gamma` is None exactly for continuous inspection.

    The distinguished "continuous" inspection rate is a regime tag rather than an
    infinite float so that downstream arithmetic stays total.
    """

    lam: float
    mu0: float
    mu1: float
    K: int
    regime: Regime = Regime.CONTINUOUS
    gamma: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime.coerce(self.regime))

    @property
    def dim(self) -> int:
        """Phase-space dimension of the inspection-regime matrices."""
        if self.regime is Regime.EXPONENTIAL:
            return 2
        if self.regime is Regime.ERLANG2:
            return 4
        return 1

    def with_gamma(self, gamma: Optional[float], regime: Union[str, Regime, None] = None) -> "QueueParams":
        if regime is None:
            regime = Regime.CONTINUOUS if gamma is None else Regime.EXPONENTIAL
        return replace(self, gamma=gamma, regime=Regime.coerce(regime))


def validate(params: QueueParams) -> QueueParams:
    """Check all model invariants and return the params unchanged.

    Raises DomainError for out-of-domain values, StabilityError when
    lam >= mu1 (the queue is then null or transient: sp(R) would reach 1),
    and RegimeError when gamma and regime disagree. Idempotent.

    lam >= mu0 is deliberately allowed; only the high rate must dominate
    the arrivals.
    """
    for name, rate in (("lambda", params.lam), ("mu0", params.mu0), ("mu1", params.mu1)):
        if not (isinstance(rate, (int, float)) and rate > 0 and rate == rate and rate != float("inf")):
            raise DomainError(f"{name} must be a positive finite rate, got {rate!r}")
    if not isinstance(params.K, int) or isinstance(params.K, bool) or params.K < 0:
        raise DomainError(f"K must be a non-negative integer, got {params.K!r}")
    if params.lam >= params.mu1:
        raise StabilityError(
            f"unstable: lambda={params.lam} must be strictly below mu1={params.mu1}")
    if params.regime is Regime.CONTINUOUS:
        if params.gamma is not None:
            raise RegimeError("continuous inspection must not carry a gamma rate "
                              f"(got gamma={params.gamma!r})")
    else:
        g = params.gamma
        if g is None:
            raise RegimeError(f"regime {params.regime.value} requires a finite gamma")
        if not (isinstance(g, (int, float)) and g > 0 and g == g and g != float("inf")):
            raise DomainError(f"gamma must be a positive finite rate, got {g!r}")
    return params


@dataclass(frozen=True)
class TaggedPosition:
    """A tagged customer at queue position n with m customers behind.

    n = 0 means the customer has departed and the residual sojourn is zero.
    """

    n: int
    m: int

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise DomainError(f"tagged position needs n, m >= 0, got ({self.n}, {self.m})")
