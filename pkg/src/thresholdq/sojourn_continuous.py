"""Sojourn-time transform for the continuously inspected queue.

A tagged customer at position n with m customers behind sees service at the
low rate while n + m <= K and at the high rate above. In FIFO order m never
shrinks, so once m >= K the remaining sojourn is Erlang(n, mu1) and the
recursion over (n, m) terminates on a finite grid.

All transform evaluations are batched over s: pass an array of points and
every grid cell is computed for the whole batch at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, RegimeError
from .model import QueueParams, Regime, validate
from .stationary import stationary_continuous

ScalarOrArray = Union[float, complex, np.ndarray]


@dataclass(frozen=True)
class ScalarCoefficients:
    """One-step weights of the tagged customer's (n, m) walk at a fixed s.

    a(k) weighs a service completion and b(k) an arrival behind, both given
    queue length k; B(k, h) is the running product b(k) b(k+1) ... b(k+h-1),
    i.e. the weight of h consecutive arrivals starting from length k.
    """

    params: QueueParams
    s: complex

    def a(self, k: int) -> complex:
        p = self.params
        mu = p.mu0 if k <= p.K else p.mu1
        return mu / (p.lam + mu + self.s)

    def b(self, k: int) -> complex:
        p = self.params
        mu = p.mu0 if k <= p.K else p.mu1
        return p.lam / (p.lam + mu + self.s)

    def B_product(self, k: int, h: int) -> complex:
        out = 1.0 + 0j
        for i in range(h):
            out *= self.b(k + i)
        return out

    def B(self, k: int, h: int) -> complex:
        """Closed form of the product: only the first (K - k + 1)+ factors
        use the low-rate denominator, the rest the high-rate one."""
        p = self.params
        low = min(h, max(p.K - k + 1, 0))
        return ((p.lam / (self.s + p.lam + p.mu1)) ** h
                * ((self.s + p.lam + p.mu1) / (self.s + p.lam + p.mu0)) ** low)

    # derivatives in s at 0+, used by the mean recursion

    def a_prime0(self, k: int) -> float:
        p = self.params
        mu = p.mu0 if k <= p.K else p.mu1
        return -mu / (p.lam + mu) ** 2

    def b_prime0(self, k: int) -> float:
        p = self.params
        mu = p.mu0 if k <= p.K else p.mu1
        return -p.lam / (p.lam + mu) ** 2

    def B_prime0(self, k: int, h: int) -> float:
        zero = ScalarCoefficients(self.params, 0.0)
        val, der = 1.0, 0.0
        for i in range(h):
            b0 = zero.b(k + i)
            val, der = val * b0, der * b0 + val * self.b_prime0(k + i)
        return der


@dataclass(frozen=True)
class PsiGrid:
    """Conditional transforms psi(n, m, s) on the finite lattice.

    values[..., n, m] holds psi(n, m, s) for 0 <= n <= K, 0 <= m <= K, with
    the m = K column equal to the Erlang boundary; leading axes follow the
    shape of s.
    """

    params: QueueParams
    s: np.ndarray
    values: np.ndarray

    def value(self, n: int, m: int) -> np.ndarray:
        """psi(n, m, s) for any n, m >= 0, extending beyond the stored grid."""
        if n == 0:
            return np.ones(self.s.shape, dtype=complex)
        p = self.params
        beta = p.mu1 / (p.mu1 + self.s)
        if m >= p.K:
            return beta ** n
        if n <= p.K:
            return self.values[..., n, m]
        # rows above K: every cell there has n + m > K, so the high-rate
        # recursion extends the stored row K upward as far as needed
        a_h = p.mu1 / (p.lam + p.mu1 + self.s)
        b_h = p.lam / (p.lam + p.mu1 + self.s)
        prev = [self.values[..., p.K, mm] for mm in range(m, p.K)]
        for row in range(p.K + 1, n + 1):
            cur = list(prev)
            right = beta ** row
            for idx in range(p.K - m - 1, -1, -1):
                right = a_h * prev[idx] + b_h * right
                cur[idx] = right
            prev = cur
        return prev[0]


def _as_batch(s: ScalarOrArray) -> np.ndarray:
    return np.asarray(s, dtype=complex)


def psi_boundary(n: int, s: ScalarOrArray, params: QueueParams) -> ScalarOrArray:
    """Erlang(n, mu1) transform: the tagged customer already has K or more
    behind, so the server never drops back to the low rate."""
    s_arr = _as_batch(s)
    out = (params.mu1 / (params.mu1 + s_arr)) ** n
    return complex(out) if s_arr.ndim == 0 else out


def psi_grid(params: QueueParams, s: ScalarOrArray) -> PsiGrid:
    """Fill psi(n, m, s) for n = 1..K rising, m = K-1..0 falling.

    Each cell is the one-step expansion a(n+m) psi(n-1, m) + b(n+m) psi(n, m+1),
    the Horner factorization of the row sum over arrival runs; the m = K column
    is the Erlang boundary.
    """
    validate(params)
    if params.regime is not Regime.CONTINUOUS:
        raise RegimeError("psi_grid handles the continuous regime")
    lam, mu0, mu1, K = params.lam, params.mu0, params.mu1, params.K
    s_arr = _as_batch(s)
    batch = s_arr.shape
    values = np.ones(batch + (K + 1, K + 1), dtype=complex)
    beta = mu1 / (mu1 + s_arr)
    a_low = mu0 / (lam + mu0 + s_arr)
    b_low = lam / (lam + mu0 + s_arr)
    a_high = mu1 / (lam + mu1 + s_arr)
    b_high = lam / (lam + mu1 + s_arr)
    for n in range(1, K + 1):
        values[..., n, K] = beta ** n
        for m in range(K - 1, -1, -1):
            if n + m <= K:
                a_k, b_k = a_low, b_low
            else:
                a_k, b_k = a_high, b_high
            values[..., n, m] = a_k * values[..., n - 1, m] + b_k * values[..., n, m + 1]
    return PsiGrid(params=params, s=s_arr, values=values)


def phi_marginal(z: complex, m: int, s: ScalarOrArray, grid: PsiGrid,
                 params: QueueParams) -> ScalarOrArray:
    """Generating function over the tagged customer's depth above the
    threshold: phi(z, m, s) = sum_h psi(K+h+1, m, s) z^h, in closed form.

    The finite sum walks the backlog from m up to K - 1; the remainder
    collapses geometrically once the backlog reaches K.
    """
    if abs(z) >= 1.0:
        raise DomainError(f"|z| = {abs(z):.6g} must be below 1")
    if not 0 <= m <= params.K:
        raise DomainError("m must lie between 0 and K")
    lam, mu1, K = params.lam, params.mu1, params.K
    s_arr = _as_batch(s)
    denom = lam + mu1 * (1.0 - z) + s_arr
    boundary = (mu1 / (mu1 + s_arr)) ** (K + 1) * (mu1 + s_arr) / (mu1 * (1.0 - z) + s_arr)
    out = (lam / denom) ** (K - m) * boundary
    for h in range(K - m):
        out = out + mu1 * lam ** h / denom ** (h + 1) * grid.value(K, m + h)
    return complex(out) if s_arr.ndim == 0 else out


def sojourn_lt_continuous(params: QueueParams, s: ScalarOrArray) -> ScalarOrArray:
    """Stationary sojourn-time Laplace transform under continuous inspection.

    Mixes the conditional transforms over the arriving customer's stationary
    view: below-threshold entries use psi(h+1, 0, s), entries at level K+h
    reduce to an Erlang(h+1, mu1) prefix times psi(K, h, s), and the mass at
    2K or more contributes a closed-form Erlang/exponential tail.
    """
    validate(params)
    if params.regime is not Regime.CONTINUOUS:
        raise RegimeError("sojourn_lt_continuous handles the continuous regime")
    lam, mu0, mu1, K = params.lam, params.mu0, params.mu1, params.K
    s_arr = _as_batch(s)
    pi0 = stationary_continuous(params).pi0
    grid = psi_grid(params, s_arr)
    beta = mu1 / (mu1 + s_arr)
    out = np.zeros(s_arr.shape, dtype=complex)
    for h in range(K):
        out += (lam / mu0) ** h * grid.value(h + 1, 0)
        out += (lam / mu0) ** K * (lam / mu1) ** h * beta ** (h + 1) * grid.value(K, h)
    out += ((lam / mu0) ** K * (lam / mu1) ** K * mu1 / (mu1 - lam)
            * beta ** (2 * K) * (mu1 - lam) / (mu1 - lam + s_arr))
    out *= pi0
    return complex(out) if np.asarray(s).ndim == 0 else out


def mean_sojourn_continuous(params: QueueParams) -> float:
    """Mean stationary sojourn time, exact linear-time-in-K^2 recursion.

    nu(n, m) = expected absorption time of the (n, m) walk: one expected
    holding time plus the one-step mixture of neighbors, with nu(n, K) = n/mu1
    and nu(0, m) = 0. The final mixing mirrors the transform formula with the
    Erlang prefix contributing (h+1)/mu1 and the top tail in closed form.
    """
    validate(params)
    if params.regime is not Regime.CONTINUOUS:
        raise RegimeError("mean_sojourn_continuous handles the continuous regime")
    lam, mu0, mu1, K = params.lam, params.mu0, params.mu1, params.K
    pi0 = stationary_continuous(params).pi0

    # nu[n][m] for 0 <= n <= K, 0 <= m <= K (column K is the boundary)
    nu = np.zeros((K + 1, K + 1))
    for n in range(1, K + 1):
        nu[n, K] = n / mu1
        for m in range(K - 1, -1, -1):
            if n + m <= K:
                rate_total, mu = lam + mu0, mu0
            else:
                rate_total, mu = lam + mu1, mu1
            nu[n, m] = (1.0 + mu * nu[n - 1, m] + lam * nu[n, m + 1]) / rate_total

    total = 0.0
    for h in range(K):
        total += (lam / mu0) ** h * nu[h + 1, 0]
        total += (lam / mu0) ** K * (lam / mu1) ** h * (nu[K, h] + (h + 1) / mu1)
    total += ((lam / mu0) ** K * (lam / mu1) ** K
              * (2 * K / (mu1 - lam) + mu1 / (mu1 - lam) ** 2))
    return pi0 * total
