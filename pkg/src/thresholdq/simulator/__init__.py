"""Discrete-event simulation of the threshold queue.

Shares nothing with the analytic pipeline beyond the parameter container, so
it serves as independent ground truth. The event loop lives in a compiled
extension when available, with a pure-Python twin selected at import time
(force it with THRESHOLDQ_PURE=1); both consume the random stream
identically, so results are bit-for-bit backend-independent.

Randomness: numpy Philox counter-based generator, one child SeedSequence per
replication spawned from the configured seed. Stable across versions by
construction of SeedSequence.spawn.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import DomainError
from ..model import QueueParams, Regime, validate

if os.environ.get("THRESHOLDQ_PURE"):
    from . import _core_py as _kernel
else:
    try:
        from . import _core as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _core_py as _kernel


def backend() -> str:
    """Name of the active event-loop implementation: 'cython' or 'python'."""
    return _kernel.BACKEND


_REGIME_CODE = {Regime.CONTINUOUS: 0, Regime.EXPONENTIAL: 1, Regime.ERLANG2: 2}


@dataclass(frozen=True)
class SimConfig:
    params: QueueParams
    customers: int
    warmup: int = 10_000
    seed: int = 20260819
    replications: int = 1

    def __post_init__(self):
        validate(self.params)
        if self.customers < 1:
            raise DomainError("customers must be at least 1")
        if self.warmup < 0:
            raise DomainError("warmup cannot be negative")
        if self.replications < 1:
            raise DomainError("replications must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must fit in 64 bits")


@dataclass(frozen=True)
class SimResult:
    samples: np.ndarray
    mean: float
    std_error: float
    level_occupancy: np.ndarray
    arrivals_seen: np.ndarray
    _sorted: np.ndarray = field(repr=False, default=None)

    def ecdf(self, t) -> np.ndarray:
        """Empirical P(sojourn <= t), vectorized over t."""
        pos = np.searchsorted(self._sorted, np.asarray(t, dtype=float), side="right")
        return pos / len(self._sorted)


def _std_error(samples: np.ndarray, rep_means: np.ndarray) -> float:
    if len(rep_means) >= 2:
        return float(np.std(rep_means, ddof=1) / np.sqrt(len(rep_means)))
    # single stream: batch means to absorb autocorrelation
    n = len(samples)
    nb = min(100, n)
    usable = n - n % nb
    batches = samples[:usable].reshape(nb, -1).mean(axis=1)
    if nb < 2:
        return float("nan")
    return float(np.std(batches, ddof=1) / np.sqrt(nb))


def simulate(config: SimConfig) -> SimResult:
    """Run the event-driven simulation and collect sojourn statistics.

    Arrivals are Poisson, service exponential at the current rate; the rate
    rule re-evaluates instantly (continuous), at Poisson(gamma) inspections,
    or at every second phase of an Erlang-2(gamma) clock. FIFO order, sojourn
    recorded at each departure past warmup. Deterministic given the seed.
    """
    p = config.params
    regime = _REGIME_CODE[p.regime]
    gamma = p.gamma if p.gamma is not None else 0.0
    levels = p.K + 40
    per_rep = config.customers
    streams = np.random.SeedSequence(config.seed).spawn(config.replications)

    all_samples = []
    occ = np.zeros(levels)
    seen = np.zeros(levels)
    rep_means = np.empty(config.replications)
    for i, ss in enumerate(streams):
        rng = np.random.Generator(np.random.Philox(ss))
        samples = np.empty(per_rep)
        rep_occ = np.zeros(levels)
        rep_seen = np.zeros(levels)
        _kernel.run_kernel(p.lam, p.mu0, p.mu1, gamma, p.K, regime,
                           per_rep, config.warmup, rng, samples, rep_occ, rep_seen)
        all_samples.append(samples)
        occ += rep_occ
        seen += rep_seen
        rep_means[i] = samples.mean()

    pooled = np.concatenate(all_samples)
    occ_total = occ.sum()
    seen_total = seen.sum()
    return SimResult(
        samples=pooled,
        mean=float(pooled.mean()),
        std_error=_std_error(pooled, rep_means),
        level_occupancy=occ / occ_total if occ_total > 0 else occ,
        arrivals_seen=seen / seen_total if seen_total > 0 else seen,
        _sorted=np.sort(pooled),
    )


def empirical_vs_transform(result: SimResult, curve) -> float:
    """Sup over the curve's t grid of |empirical CDF - analytic CDF|."""
    return float(np.max(np.abs(result.ecdf(curve.t) - curve.F)))


def dump_samples(result: SimResult, path: str) -> None:
    """One sojourn time per line, decimal text."""
    with open(path, "w", newline="\n") as fh:
        for x in result.samples:
            fh.write(f"{x:.12g}\n")
