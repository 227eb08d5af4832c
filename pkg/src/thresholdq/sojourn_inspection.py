"""Sojourn-time transform for exponential and Erlang-2 inspection.

The tagged customer's conditional transform is a row vector over inspection
phases (2 for exponential, 4 for Erlang-2: rate bit then clock phase). Below
the threshold it satisfies a finite lattice recursion; the infinite part is
folded through the matrix generating function phi(Z, m, s) evaluated at
Z = R, so everything terminates after K steps.

Row-vector convention throughout: psi has shape (..., d) and multiplies
matrices from the left.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Union

import numpy as np

from .matrix_gf import TransformContext, solve_S, solve_S_derivative, transform_context
from .model import QueueParams, Regime, validate
from .stationary import StationaryVector, boundary_probabilities, r_matrix
from .errors import RegimeError

ScalarOrArray = Union[float, complex, np.ndarray]


def _rowmat(v: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """Batched row-vector times matrix."""
    return np.einsum('...i,...ij->...j', v, mat)


@dataclass
class PsiVecGrid:
    """Row vectors psi(n, m, s) on the finite lattice, batched over s.

    Stored cells cover 1 <= n <= K, 0 <= m <= K-1; the boundary m >= K is
    e T(s)^n, materialized lazily, and rows above n = K extend on demand
    (they only ever see the above-threshold inspection matrix).
    """

    params: QueueParams
    ctx: TransformContext
    values: np.ndarray
    _eTn: List[np.ndarray] = field(default_factory=list)

    def _boundary(self, n: int) -> np.ndarray:
        if not self._eTn:
            self._eTn.append(np.ones(self.ctx.s.shape + (self.ctx.dim,), dtype=complex))
        while len(self._eTn) <= n:
            self._eTn.append(_rowmat(self._eTn[-1], self.ctx.T))
        return self._eTn[n]

    def value(self, n: int, m: int) -> np.ndarray:
        K = self.params.K
        if n == 0:
            return np.ones(self.ctx.s.shape + (self.ctx.dim,), dtype=complex)
        if m >= K:
            return self._boundary(n)
        if n <= K:
            return self.values[..., n, m, :]
        # every cell on rows above K has n + m > K
        inv1 = np.linalg.inv(self.ctx.Hs - self.ctx.Gamma1)
        mats = self.ctx.mats
        prev = [self.values[..., K, mm, :] for mm in range(m, K)]
        for row in range(K + 1, n + 1):
            cur = list(prev)
            right = self._boundary(row)
            for idx in range(K - m - 1, -1, -1):
                right = _rowmat(_rowmat(prev[idx], mats.M) + _rowmat(right, mats.Lambda), inv1)
                cur[idx] = right
            prev = cur
        return prev[0]

    def psi_K_Kplus1(self) -> np.ndarray:
        """The vector e T(s)^K entering the generating-function assembly."""
        return self._boundary(self.params.K)


@dataclass(frozen=True)
class UMatrices:
    """Per-depth series sums U_M(Z, k, s) and U(Z, k, s), k = 0..K.

    U_M[k] = S(Z, Y^k, T_M) and U[k] = S(Z, Y^k, T) with
    Y = T_Lambda S(Z, I, T_M); each entry satisfies X - B X Z = Y^k.
    """

    Z: np.ndarray
    ctx: TransformContext
    Y: np.ndarray
    Ypow: List[np.ndarray]
    U_M: List[np.ndarray]
    U: List[np.ndarray]


def psi_vec_boundary(n: int, s: ScalarOrArray, ctx: TransformContext) -> np.ndarray:
    """e T(s)^n: remaining sojourn once K or more customers queue behind."""
    del s  # carried by ctx; kept for call-shape symmetry with the scalar model
    out = np.ones(ctx.s.shape + (ctx.dim,), dtype=complex)
    for _ in range(n):
        out = _rowmat(out, ctx.T)
    return out


def psi_vec_grid(params: QueueParams, s: ScalarOrArray) -> PsiVecGrid:
    """Fill the lattice psi(n,m,s)(H - Gamma_ind) = psi(n-1,m,s) M + psi(n,m+1,s) Lambda.

    n rises from 1 to K, m falls from K-1 to 0; the indicator picks Gamma1
    when n + m > K. Boundary rows: psi(0, m) = e, psi(n, m >= K) = e T^n.
    """
    validate(params)
    ctx = transform_context(params, s)
    K, d = params.K, ctx.dim
    batch = ctx.s.shape
    inv0 = np.linalg.inv(ctx.Hs - ctx.Gamma0)
    inv1 = np.linalg.inv(ctx.Hs - ctx.Gamma1)
    values = np.ones(batch + (K + 1, max(K, 1), d), dtype=complex)
    grid = PsiVecGrid(params=params, ctx=ctx, values=values)
    mats = ctx.mats
    for n in range(1, K + 1):
        above = grid._boundary(n)
        for m in range(K - 1, -1, -1):
            left = values[..., n - 1, m, :] if n > 1 else np.ones(batch + (d,), dtype=complex)
            up = values[..., n, m + 1, :] if m + 1 <= K - 1 else above
            rhs = _rowmat(left, mats.M) + _rowmat(up, mats.Lambda)
            inv = inv1 if n + m > K else inv0
            values[..., n, m, :] = _rowmat(rhs, inv)
    return grid


def u_matrices(Z: np.ndarray, s: ScalarOrArray, ctx: TransformContext, K: int) -> UMatrices:
    """Series sums for every depth needed by the finite phi assembly."""
    del s  # carried by ctx
    d = ctx.dim
    S0 = solve_S(Z, np.eye(d), ctx.T_M)
    Y = ctx.T_Lambda @ S0
    Ypow = [np.broadcast_to(np.eye(d, dtype=complex), Y.shape).copy()]
    for _ in range(K):
        Ypow.append(Ypow[-1] @ Y)
    U_M = [solve_S(Z, Yk, ctx.T_M) for Yk in Ypow]
    U = [solve_S(Z, Yk, ctx.T) for Yk in Ypow]
    return UMatrices(Z=np.asarray(Z), ctx=ctx, Y=Y, Ypow=Ypow, U_M=U_M, U=U)


def phi_matrix(Z: np.ndarray, m: int, s: ScalarOrArray, grid: PsiVecGrid,
               umats: UMatrices) -> np.ndarray:
    """Row vector phi(Z, m, s) = sum_h psi(K+h+1, m, s) Z^h in finite form.

    Each lattice exit at backlog k contributes psi(K,k) T_M U_M(k-m); paths
    that push the backlog past K exit through e T^K T U(K-m).
    """
    del s  # carried by grid/umats
    K = grid.params.K
    ctx = grid.ctx
    out = _rowmat(_rowmat(grid.psi_K_Kplus1(), ctx.T), umats.U[K - m])
    for k in range(m, K):
        out = out + _rowmat(_rowmat(grid.value(K, k), ctx.T_M), umats.U_M[k - m])
    return out


def sojourn_lt_inspection(params: QueueParams, s: ScalarOrArray) -> ScalarOrArray:
    """Stationary sojourn-time Laplace transform under delayed inspection.

    Mixes the conditional row vectors against the stationary phase vectors:
    psi(s) = sum_{n<K} psi(n+1, 0, s) pi_n + phi(R, 0, s) pi_K.
    """
    validate(params)
    if params.regime is Regime.CONTINUOUS:
        raise RegimeError("use sojourn_lt_continuous for the continuous regime")
    R = r_matrix(params)
    st = boundary_probabilities(params, R)
    return _assemble_lt(params, s, R, st)


def _assemble_lt(params: QueueParams, s: ScalarOrArray, R: np.ndarray,
                 st: StationaryVector) -> ScalarOrArray:
    s_arr = np.asarray(s, dtype=complex)
    grid = psi_vec_grid(params, s_arr)
    umats = u_matrices(R, s_arr, grid.ctx, params.K)
    out = np.zeros(s_arr.shape, dtype=complex)
    for n in range(params.K):
        out = out + grid.value(n + 1, 0) @ st.boundary[n]
    out = out + phi_matrix(R, 0, s_arr, grid, umats) @ st.boundary[params.K]
    return complex(out) if s_arr.ndim == 0 else out


def erlang2_pipeline(params: QueueParams, s: ScalarOrArray) -> ScalarOrArray:
    """Four-phase variant of the transform pipeline (rate bit x clock phase)."""
    validate(params)
    if params.regime is not Regime.ERLANG2:
        raise RegimeError("erlang2_pipeline requires the Erlang-2 regime")
    return sojourn_lt_inspection(params, s)


def mean_sojourn_inspection(params: QueueParams) -> float:
    """Mean stationary sojourn time via exact differentiation at s = 0.

    Runs the derivative lattice nu(n,m)(H0 - Gamma_ind) = nu(n-1,m) M
    + nu(n,m+1) Lambda + e with boundary nu(n, m>=K) = e sum_k T^k M^{-1} T^{n-k+1},
    then assembles the derivative of the generating-function expansion with
    U'_M, U' from the differentiated series systems.
    """
    validate(params)
    if params.regime is Regime.CONTINUOUS:
        raise RegimeError("use mean_sojourn_continuous for the continuous regime")
    K = params.K
    R = r_matrix(params)
    st = boundary_probabilities(params, R)
    ctx = transform_context(params, 0.0)
    mats = ctx.mats
    d = ctx.dim
    e = np.ones(d)
    Minv = np.linalg.inv(mats.M)
    T0, TM0, TL0 = ctx.T, ctx.T_M, ctx.T_Lambda
    inv0 = np.linalg.inv(ctx.Hs - ctx.Gamma0)
    inv1 = np.linalg.inv(ctx.Hs - ctx.Gamma1)

    # boundary: C_n = sum_{k=1..n} T^k M^{-1} T^{n-k+1} via C_n = T C_{n-1} + T M^{-1} T^n
    Tpow = np.eye(d, dtype=complex)
    C = np.zeros((d, d), dtype=complex)
    nu_bound = [np.zeros(d, dtype=complex)]
    for _ in range(1, K + 2):
        Tpow = Tpow @ T0
        C = T0 @ C + T0 @ Minv @ Tpow
        nu_bound.append(e @ C)

    nu = np.zeros((K + 1, max(K, 1), d), dtype=complex)
    for n in range(1, K + 1):
        for m in range(K - 1, -1, -1):
            left = nu[n - 1, m] if n > 1 else np.zeros(d)
            up = nu[n, m + 1] if m + 1 <= K - 1 else nu_bound[n]
            rhs = left @ mats.M + up @ mats.Lambda + e
            nu[n, m] = rhs @ (inv1 if n + m > K else inv0)

    # derivatives of the transform matrices at s = 0
    Tp = -T0 @ Minv @ T0
    TMp = -TM0 @ Minv @ TM0
    TLp = -TL0 @ Minv @ TM0

    S0 = solve_S(R, np.eye(d), TM0)
    S0p = solve_S_derivative(R, np.zeros((d, d)), TM0, TMp, S0)
    Y = TL0 @ S0
    Yp = TLp @ S0 + TL0 @ S0p
    Ypow = [np.eye(d, dtype=complex)]
    for _ in range(K):
        Ypow.append(Ypow[-1] @ Y)

    def ypow_deriv(k: int) -> np.ndarray:
        out = np.zeros((d, d), dtype=complex)
        for j in range(k):
            out += Ypow[j] @ Yp @ Ypow[k - 1 - j]
        return out

    neg_phip = np.zeros(d, dtype=complex)
    for k in range(K):
        UM = solve_S(R, Ypow[k], TM0)
        UMp = solve_S_derivative(R, ypow_deriv(k), TM0, TMp, UM)
        nu_Kk = nu[K, k] if K > 0 else None
        neg_phip += nu_Kk @ TM0 @ UM - e @ (TMp @ UM + TM0 @ UMp)
    U = solve_S(R, Ypow[K], T0)
    Up = solve_S_derivative(R, ypow_deriv(K), T0, Tp, U)
    neg_phip += nu_bound[K] @ T0 @ U - e @ (Tp @ U + T0 @ Up)

    total = 0.0 + 0j
    for n in range(K):
        left = nu[n + 1, 0]
        total += left @ st.boundary[n]
    total += neg_phip @ st.boundary[K]
    return float(total.real)
