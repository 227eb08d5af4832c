"""Stationary queue-length distributions.

Continuous inspection admits a scalar closed form. Under exponential or
Erlang-2 inspection the queue is a quasi-birth-death process over (level,
phase): the levels below the threshold are solved as one finite linear
system and the tail is matrix-geometric, pi_{K+h} = R^h pi_K.

Phase conventions (column vectors):
  exponential, d=2: (low rate, high rate)
  Erlang-2,   d=4: (rate, clock phase) in the order 00, 01, 10, 11
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .errors import ConvergenceError, RegimeError, SingularSystemError
from .model import QueueParams, Regime, validate


@dataclass(frozen=True)
class StationaryScalar:
    """Closed-form queue-length distribution for continuous inspection."""

    params: QueueParams
    pi0: float

    def probability(self, n: int) -> float:
        lam, mu0, mu1, K = self.params.lam, self.params.mu0, self.params.mu1, self.params.K
        if n < 0:
            return 0.0
        if n <= K:
            return (lam / mu0) ** n * self.pi0
        return (mu1 / mu0) ** K * (lam / mu1) ** n * self.pi0


@dataclass(frozen=True)
class RateMatrixSet:
    """Level-transition blocks of the QBD generator, d in {2, 4}."""

    Lambda: np.ndarray
    M: np.ndarray
    Gamma2: np.ndarray
    Gamma3: np.ndarray
    H1: np.ndarray = field(init=False)
    H2: np.ndarray = field(init=False)
    H3: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "H1", self.Lambda + self.Gamma2)
        object.__setattr__(self, "H2", self.M + self.Lambda + self.Gamma2)
        object.__setattr__(self, "H3", self.M + self.Lambda + self.Gamma3)

    @property
    def dim(self) -> int:
        return self.M.shape[0]


@dataclass(frozen=True)
class StationaryVector:
    """Boundary vectors pi_0..pi_K plus the geometric-tail matrix R."""

    boundary: List[np.ndarray]
    R: np.ndarray

    @property
    def K(self) -> int:
        return len(self.boundary) - 1

    def level(self, n: int) -> np.ndarray:
        """Column vector pi_n, any n >= 0."""
        if n <= self.K:
            return self.boundary[n]
        return np.linalg.matrix_power(self.R, n - self.K) @ self.boundary[self.K]

    def aggregate(self, n: int) -> float:
        """P(queue length = n), phases summed out."""
        return float(self.level(n).sum())

    def tail_mass(self) -> float:
        """Total probability of levels K and above."""
        eye = np.eye(self.R.shape[0])
        return float(np.linalg.solve(eye - self.R.T, np.ones(self.R.shape[0])) @ self.boundary[self.K])


def stationary_continuous(params: QueueParams) -> StationaryScalar:
    """Queue-length distribution when the rate adapts at every crossing.

    pi_n is (lam/mu0)^n pi_0 up to the threshold and decays geometrically with
    ratio lam/mu1 above it; pi_0 normalizes the two pieces, summing the tail in
    closed form.
    """
    validate(params)
    if params.regime is not Regime.CONTINUOUS:
        raise RegimeError("stationary_continuous requires the continuous regime")
    lam, mu0, mu1, K = params.lam, params.mu0, params.mu1, params.K
    r0 = lam / mu0
    if r0 == 1.0:
        head = float(K + 1)
    else:
        head = (1.0 - r0 ** (K + 1)) / (1.0 - r0)
    tail = lam / (mu1 - lam) * r0 ** K
    return StationaryScalar(params, 1.0 / (head + tail))


def _erlang2_gammas(g: float):
    G2 = np.array([[ g, -g, 0., -g],
                   [-g,  g, 0., 0.],
                   [0., 0.,  g, 0.],
                   [0., 0., -g,  g]])
    G3 = np.array([[ g, 0., 0., 0.],
                   [-g,  g, 0., 0.],
                   [0., -g,  g, -g],
                   [0., 0., -g,  g]])
    return G2, G3


def rate_matrices(params: QueueParams) -> RateMatrixSet:
    """Assemble the level-transition blocks for the inspection regimes.

    Gamma2 governs inspection transitions while the queue is at or below the
    threshold (completed inspections set the rate low), Gamma3 above it.
    """
    validate(params)
    g = params.gamma
    if params.regime is Regime.EXPONENTIAL:
        Lam = params.lam * np.eye(2)
        M = np.diag([params.mu0, params.mu1])
        G2 = np.array([[0., -g], [0., g]])
        G3 = np.array([[g, 0.], [-g, 0.]])
    elif params.regime is Regime.ERLANG2:
        Lam = params.lam * np.eye(4)
        M = np.diag([params.mu0, params.mu0, params.mu1, params.mu1])
        G2, G3 = _erlang2_gammas(g)
    else:
        raise RegimeError("continuous inspection has no phase matrices")
    return RateMatrixSet(Lambda=Lam, M=M, Gamma2=G2, Gamma3=G3)


def r_matrix_exponential(params: QueueParams) -> np.ndarray:
    """Closed-form 2x2 tail-rate matrix for exponential inspection.

    The top-left entry is the minimal root of mu0 r^2 - (mu0+gamma+lam) r + lam = 0.
    """
    validate(params)
    if params.regime is not Regime.EXPONENTIAL:
        raise RegimeError("r_matrix_exponential requires the exponential regime")
    lam, mu0, mu1, g = params.lam, params.mu0, params.mu1, params.gamma
    half = (mu0 + g + lam) / (2.0 * mu0)
    r00 = half - math.sqrt(half * half - lam / mu0)
    return np.array([[r00, 0.0],
                     [g / mu1 * r00 / (1.0 - r00), lam / mu1]])


def r_matrix_erlang2(params: QueueParams) -> np.ndarray:
    """Closed-form 4x4 tail-rate matrix for Erlang-2 inspection.

    Lower-block-triangular; the two diagonal blocks repeat (R11 twice,
    [[R33,R34],[R34,R33]] symmetric). The R41 numerator is a single product
    spanning the polynomial and the 2*gamma terms over one squared denominator.
    """
    validate(params)
    if params.regime is not Regime.ERLANG2:
        raise RegimeError("r_matrix_erlang2 requires the Erlang-2 regime")
    lam, mu0, mu1, g = params.lam, params.mu0, params.mu1, params.gamma

    r11 = (g + lam + mu0 - math.sqrt((g + lam + mu0) ** 2 - 4.0 * lam * mu0)) / (2.0 * mu0)
    r21 = g * r11 / (g + lam + mu0 - 2.0 * mu0 * r11)
    r33 = (mu1 * (2.0 * g + 3.0 * lam + mu1)
           - math.sqrt(mu1 ** 2 * (4.0 * g ** 2 + (lam - mu1) ** 2 + 4.0 * g * (lam + mu1)))
           ) / (4.0 * mu1 ** 2)
    r34 = lam / mu1 - r33

    den42 = ((2.0 * g + lam - mu1 * (-1.0 + r11 + r33 - r34))
             * (lam - mu1 * (-1.0 + r11 + r33 + r34)))
    r42 = g * r11 * (g + mu1 * r34) / den42
    num41 = (lam ** 2 - 2.0 * lam * mu1 * (-1.0 + r33)
             - mu1 ** 2 * (r11 ** 2 - (-1.0 + r33) ** 2 + r34 ** 2)
             + 2.0 * g * (lam - mu1 * (-1.0 + r33 + r34)))
    r41 = g * r21 * (g + mu1 * r34) * num41 / den42 ** 2

    den3 = g + lam - mu1 * (-1.0 + r11 + r33)
    r32 = g * r11 * (-den3) / (-(den3 ** 2) + (g + mu1 * r34) ** 2)
    r31 = (g * (r41 + r21) + mu1 * (r32 * r21 + r41 * r34)) / den3

    return np.array([[r11, 0.0, 0.0, 0.0],
                     [r21, r11, 0.0, 0.0],
                     [r31, r32, r33, r34],
                     [r41, r42, r34, r33]])


def r_matrix(params: QueueParams) -> np.ndarray:
    if params.regime is Regime.EXPONENTIAL:
        return r_matrix_exponential(params)
    if params.regime is Regime.ERLANG2:
        return r_matrix_erlang2(params)
    raise RegimeError("no tail-rate matrix for continuous inspection")


def r_matrix_iterative(mats: RateMatrixSet, tol: float = 1e-12,
                       max_iter: int = 1_000_000) -> np.ndarray:
    """Minimal nonnegative solution of Lambda - H3 R + M R^2 = 0.

    Fixed-point iteration R <- H3^{-1} (Lambda + M R^2) from R = 0; the iterates
    increase entrywise to the minimal solution. Stops when the entrywise change
    drops below tol.
    """
    H3inv = np.linalg.inv(mats.H3)
    R = np.zeros_like(mats.M)
    for _ in range(max_iter):
        Rn = H3inv @ (mats.Lambda + mats.M @ R @ R)
        if np.max(np.abs(Rn - R)) < tol:
            return Rn
        R = Rn
    raise ConvergenceError(f"R iteration did not reach tol={tol} in {max_iter} steps")


def boundary_probabilities(params: QueueParams, R: np.ndarray) -> StationaryVector:
    """Solve the finite boundary system for pi_0..pi_K.

    Assembles the level-0 equation, the interior equations for levels 1..K-1,
    and the level-K equation with pi_{K+1} = R pi_K substituted, then replaces
    the last (redundant) row with the normalization
    sum_{k<K} e pi_k + e (I - R)^{-1} pi_K = 1 and solves densely. K is small
    in practice, so robustness wins over sparsity.
    """
    validate(params)
    mats = rate_matrices(params)
    d, K = mats.dim, params.K
    n_unknown = d * (K + 1)
    A = np.zeros((n_unknown, n_unknown))
    b = np.zeros(n_unknown)

    def blk(i, j):
        return slice(d * i, d * (i + 1)), slice(d * j, d * (j + 1))

    A[blk(0, 0)] = -mats.H1
    if K > 0:
        A[blk(0, 1)] = mats.M
    for n in range(1, K):
        A[blk(n, n - 1)] = mats.Lambda
        A[blk(n, n)] = -mats.H2
        A[blk(n, n + 1)] = mats.M
    if K > 0:
        A[blk(K, K - 1)] = mats.Lambda
        rows, cols = blk(K, K)
        A[rows, cols] += -mats.H2 + mats.M @ R
    else:
        rows, cols = blk(0, 0)
        A[rows, cols] += mats.M @ R

    eye = np.eye(d)
    try:
        tail_weights = np.linalg.solve((eye - R).T, np.ones(d))
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("I - R is singular; spectral radius at 1") from exc
    A[-1, :] = 0.0
    for k in range(K):
        A[-1, d * k:d * (k + 1)] = 1.0
    A[-1, d * K:] = tail_weights
    b[-1] = 1.0

    try:
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("boundary balance system is singular") from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("boundary balance system produced non-finite values")
    return StationaryVector(boundary=[x[d * i:d * (i + 1)] for i in range(K + 1)], R=R)


def stationary_inspection(params: QueueParams) -> StationaryVector:
    """Convenience wrapper: closed-form R plus the boundary solve."""
    return boundary_probabilities(params, r_matrix(params))
