"""Matrix series solver and the s-dependent transform matrices.

Everything here is batched over s: pass a scalar for one evaluation point or
an array of shape (...,) to get matrices of shape (..., d, d). The linear
algebra broadcasts, so inverting one matrix and inverting ten thousand is the
same code path.

S(Z, A, B) denotes the series sum_{h>=0} B^h A Z^h, the unique solution of
S - B S Z = A when every eigenvalue product lambda_i(B) lambda_j(Z) lies
strictly inside the unit circle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .errors import RegimeError, SingularMatrixError, SingularSystemError, SpectralRadiusError
from .model import QueueParams, Regime
from .stationary import RateMatrixSet, rate_matrices

ComplexMatrix = np.ndarray
ScalarOrArray = Union[float, complex, np.ndarray]

_SP_TOL = 1e-9


@dataclass(frozen=True)
class TransformContext:
    """All s-dependent matrices for one batch of evaluation points.

    T carries a completed service at the high rate with the threshold
    indicator stuck on; T_M and T_Lambda carry a service completion or an
    arrival between inspections, again with the indicator on.
    """

    s: np.ndarray
    mats: RateMatrixSet
    Hs: np.ndarray
    Gamma0: np.ndarray
    Gamma1: np.ndarray
    T: np.ndarray
    T_M: np.ndarray
    T_Lambda: np.ndarray

    @property
    def dim(self) -> int:
        return self.mats.dim


def _indicator_gammas(params: QueueParams) -> Tuple[np.ndarray, np.ndarray]:
    """Inspection matrices resolved by the tagged customer's own indicator.

    Column x holds the rate out of pre-inspection state x; the row picks the
    post-inspection state. Gamma0 applies while position + backlog <= K
    (completed inspections set the low rate), Gamma1 above.
    """
    g = params.gamma
    if params.regime is Regime.EXPONENTIAL:
        G0 = np.array([[g, g], [0., 0.]])
        G1 = np.array([[0., 0.], [g, g]])
    elif params.regime is Regime.ERLANG2:
        G0 = np.array([[0., g, 0., g],
                       [g, 0., 0., 0.],
                       [0., 0., 0., 0.],
                       [0., 0., g, 0.]])
        G1 = np.array([[0., 0., 0., 0.],
                       [g, 0., 0., 0.],
                       [0., g, 0., g],
                       [0., 0., g, 0.]])
    else:
        raise RegimeError("continuous inspection has no transform matrices")
    return G0, G1


def _inv(mat: np.ndarray, what: str) -> np.ndarray:
    try:
        out = np.linalg.inv(mat)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"{what} is singular") from exc
    if not np.all(np.isfinite(out)):
        raise SingularMatrixError(f"{what} inverse has non-finite entries")
    return out


def transform_context(params: QueueParams, s: ScalarOrArray) -> TransformContext:
    """Assemble H(s), the indicator inspection matrices, and T, T_M, T_Lambda.

    H(s) = (gamma + s) I + Lambda + M is the diagonal outflow rate of the
    tagged customer's chain; T(s) = M (H - Gamma1 - Lambda)^{-1} and
    T_A(s) = A (H - Gamma1)^{-1} for A in {Lambda, M}.
    """
    mats = rate_matrices(params)
    G0, G1 = _indicator_gammas(params)
    d = mats.dim
    s_arr = np.asarray(s, dtype=complex)
    eye = np.eye(d)
    Hs = (params.gamma + s_arr)[..., None, None] * eye + mats.Lambda + mats.M
    core = Hs - G1
    T = mats.M @ _inv(core - mats.Lambda, "H(s) - Gamma1 - Lambda")
    core_inv = _inv(core, "H(s) - Gamma1")
    return TransformContext(
        s=s_arr, mats=mats, Hs=Hs, Gamma0=G0, Gamma1=G1,
        T=T, T_M=mats.M @ core_inv, T_Lambda=mats.Lambda @ core_inv,
    )


def _spectral_gate(Z: np.ndarray, B: np.ndarray) -> None:
    """Reject (Z, B) pairs whose series cannot converge.

    The admissible region is max |lambda_i(B) lambda_j(Z)| < 1, not
    sp(B) < 1: the boundary transform matrix has a unit eigenvalue at s = 0
    and slightly exceeds one at the small negative s used by moment finite
    differences, yet the products stay below 1 whenever sp(Z) does.
    """
    eig_z = np.linalg.eigvals(Z)
    sp_z = float(np.abs(eig_z).max())
    if sp_z > 1.0 + _SP_TOL:
        raise SpectralRadiusError(f"sp(Z) = {sp_z:.6g} exceeds 1")
    eig_b = np.linalg.eigvals(B)
    prod = np.abs(eig_b[..., :, None] * eig_z[..., None, :]).max()
    if prod >= 1.0 - _SP_TOL:
        raise SpectralRadiusError(
            f"max |eig(B) eig(Z)| = {float(prod):.6g} too close to 1; series diverges")


def _vec(mat: np.ndarray) -> np.ndarray:
    # column-major flattening, batched over leading axes
    d = mat.shape[-1]
    return np.swapaxes(mat, -1, -2).reshape(*mat.shape[:-2], d * d)


def _unvec(x: np.ndarray, d: int) -> np.ndarray:
    return np.swapaxes(x.reshape(*x.shape[:-1], d, d), -1, -2)


def solve_S(Z: np.ndarray, A: np.ndarray, B: np.ndarray) -> ComplexMatrix:
    """Unique solution of S - B S Z = A, i.e. S = sum_{h>=0} B^h A Z^h.

    Flattens to a d^2 x d^2 dense system per batch element: column-major
    vec turns B S Z into (Z^T kron B) vec(S). d <= 4 makes the direct solve
    cheap and immune to the slow fixed-point convergence near sp = 1.
    """
    Z = np.asarray(Z)
    A = np.asarray(A)
    B = np.asarray(B)
    d = Z.shape[-1]
    batch = np.broadcast_shapes(Z.shape[:-2], A.shape[:-2], B.shape[:-2])
    Zb = np.broadcast_to(Z, batch + (d, d))
    Bb = np.broadcast_to(B, batch + (d, d))
    Ab = np.broadcast_to(A, batch + (d, d))
    _spectral_gate(Zb, Bb)

    kron = np.einsum('...ij,...kl->...ikjl', np.swapaxes(Zb, -1, -2), Bb)
    kron = kron.reshape(batch + (d * d, d * d))
    lhs = np.eye(d * d) - kron
    try:
        x = np.linalg.solve(lhs, _vec(Ab)[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("flattened series system is singular") from exc
    return _unvec(x, d)


def series_oracle(Z: np.ndarray, A: np.ndarray, B: np.ndarray, N: int) -> ComplexMatrix:
    """Direct truncation sum_{h=0}^{N} B^h A Z^h, for validating solve_S."""
    Z = np.asarray(Z)
    A = np.asarray(A)
    B = np.asarray(B)
    d = Z.shape[-1]
    batch = np.broadcast_shapes(Z.shape[:-2], A.shape[:-2], B.shape[:-2])
    term = np.broadcast_to(A, batch + (d, d)).astype(np.result_type(Z, A, B))
    total = term.copy()
    for _ in range(N):
        term = B @ term @ Z
        total += term
    return total


def series_collapse_identity(Z: np.ndarray, A: np.ndarray, B: np.ndarray,
                             T1: np.ndarray, T2: np.ndarray,
                             H: int) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Truncated double series versus its closed form, returned as (lhs, rhs).

    lhs = sum_{h=0}^{H} S(C_h Z C_h^{-1}, A, B) C_h Z^h with C_h = T2 T1^h;
    rhs = S(Z, A T2 S(Z, I, T1), B). Term h of lhs is evaluated through the
    exact per-term rewrite S(C Z C^{-1}, A, B) C = S(Z, A C, B), which avoids
    conjugating by the ill-conditioned high powers of T1.
    """
    Z = np.asarray(Z)
    A = np.asarray(A)
    B = np.asarray(B)
    d = Z.shape[-1]
    lhs = np.zeros(np.broadcast_shapes(Z.shape, A.shape, B.shape, T1.shape, T2.shape),
                   dtype=complex)
    C = np.broadcast_to(np.asarray(T2), lhs.shape).astype(complex)
    Zh = np.broadcast_to(np.eye(d), lhs.shape).astype(complex)
    for _ in range(H + 1):
        lhs = lhs + solve_S(Z, A @ C, B) @ Zh
        C = C @ T1
        Zh = Zh @ Z
    inner = solve_S(Z, np.eye(d), T1)
    rhs = solve_S(Z, A @ np.asarray(T2) @ inner, B)
    return lhs, rhs


def solve_S_derivative(Z: np.ndarray, Aprime: np.ndarray, B: np.ndarray,
                       Bprime: np.ndarray, S: np.ndarray) -> ComplexMatrix:
    """Derivative of S(Z, A(s), B(s)) in s with Z constant.

    Differentiating S - B S Z = A gives S' - B S' Z = A' + B' S Z, the same
    flattened system with a new right side. S must be the already-computed
    series value at the same point.
    """
    rhs = np.asarray(Aprime) + np.asarray(Bprime) @ np.asarray(S) @ np.asarray(Z)
    return solve_S(Z, rhs, B)
