"""Series solver S(Z,A,B), its derivative, and the s-dependent T matrices."""

import numpy as np
import pytest

from thresholdq import QueueParams, SingularMatrixError, SpectralRadiusError, r_matrix
from thresholdq.matrix_gf import (series_collapse_identity, series_oracle,
                                  solve_S, solve_S_derivative,
                                  transform_context)

EXAMPLE = QueueParams(lam=9/8, mu0=1.0, mu1=1.5, K=2,
                      regime="exponential", gamma=1/8)


def random_contraction(rng, d, radius):
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return m * (radius / np.max(np.abs(np.linalg.eigvals(m))))


def random_dense(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


# transform context -----------------------------------------------------------

def test_context_t_at_zero():
    ctx = transform_context(EXAMPLE, 0.0)
    assert np.max(np.abs(ctx.T - [[8/9, 0.0], [1/9, 1.0]])) < 1e-14


def test_context_t_lambda_at_one():
    ctx = transform_context(EXAMPLE, 1.0)
    assert np.max(np.abs(ctx.T_Lambda - [[9/26, 0.0], [9/754, 9/29]])) < 1e-14


@pytest.mark.parametrize("regime", ["exponential", "erlang2"])
def test_context_defining_relations(regime):
    p = QueueParams(lam=0.9, mu0=0.7, mu1=1.4, K=1, regime=regime, gamma=0.6)
    rng = np.random.default_rng(3)
    mats_s = rng.uniform(0.0, 4.0, size=6)
    for s in mats_s:
        ctx = transform_context(p, s)
        m = ctx.mats
        core = ctx.Hs - ctx.Gamma1 - m.Lambda
        assert np.max(np.abs(ctx.T @ core - m.M)) < 1e-13
        assert np.max(np.abs(ctx.T_M @ (ctx.Hs - ctx.Gamma1) - m.M)) < 1e-13
        assert np.max(np.abs(ctx.T_Lambda @ (ctx.Hs - ctx.Gamma1) - m.Lambda)) < 1e-13
        expected_H = (p.gamma + s) * np.eye(p.dim) + m.Lambda + m.M
        assert np.max(np.abs(ctx.Hs - expected_H)) < 1e-13


@pytest.mark.parametrize("regime", ["exponential", "erlang2"])
def test_context_spectral_radii_below_one(regime):
    p = QueueParams(lam=1.1, mu0=0.8, mu1=1.6, K=2, regime=regime, gamma=0.9)
    rng = np.random.default_rng(11)
    for _ in range(8):
        s = rng.uniform(0.02, 6.0)
        ctx = transform_context(p, s)
        for mat in (ctx.T, ctx.T_M):
            assert np.max(np.abs(np.linalg.eigvals(mat))) < 1.0


def test_context_singular_off_domain():
    # s = -(gamma + mu0) kills the slow-phase pivot of H - Gamma1 - Lambda
    with pytest.raises(SingularMatrixError):
        transform_context(EXAMPLE, -(1/8 + 1.0))


# solve_S ----------------------------------------------------------------------

def test_solve_zero_argument_returns_a():
    rng = np.random.default_rng(0)
    A = random_dense(rng, 3)
    B = random_contraction(rng, 3, 0.8)
    assert np.max(np.abs(solve_S(np.zeros((3, 3)), A, B) - A)) == 0.0


def test_solve_golden_display():
    ctx = transform_context(EXAMPLE, 1.0)
    S = solve_S(r_matrix(EXAMPLE), np.eye(2), ctx.T_M)
    assert np.max(np.abs(S - [[13/10, 0.0], [6/25, 29/20]])) < 1e-13


@pytest.mark.parametrize("d", [2, 4])
def test_solve_residual_series_and_linearity(d):
    rng = np.random.default_rng(d)
    for _ in range(15):
        Z = random_contraction(rng, d, rng.uniform(0.2, 0.95))
        B = random_contraction(rng, d, rng.uniform(0.2, 0.9))
        A1, A2 = random_dense(rng, d), random_dense(rng, d)
        S1 = solve_S(Z, A1, B)
        assert np.max(np.abs(S1 - B @ S1 @ Z - A1)) < 1e-12
        assert np.max(np.abs(S1 - series_oracle(Z, A1, B, 400))) < 1e-10
        gap = solve_S(Z, A1 + A2, B) - S1 - solve_S(Z, A2, B)
        assert np.max(np.abs(gap)) < 1e-12


def test_solve_homogeneous_has_only_zero():
    rng = np.random.default_rng(5)
    Z = random_contraction(rng, 2, 0.9)
    B = random_contraction(rng, 2, 0.85)
    assert np.max(np.abs(solve_S(Z, np.zeros((2, 2)), B))) == 0.0
    flat = np.eye(4) - np.kron(Z.T, B)
    assert np.linalg.cond(flat) < 1e12


def test_solve_batched_matches_loop():
    rng = np.random.default_rng(9)
    Z = np.stack([random_contraction(rng, 2, 0.8) for _ in range(3)])
    B = np.stack([random_contraction(rng, 2, 0.7) for _ in range(3)])
    A = np.stack([random_dense(rng, 2) for _ in range(3)])
    batched = solve_S(Z, A, B)
    for i in range(3):
        assert np.max(np.abs(batched[i] - solve_S(Z[i], A[i], B[i]))) < 1e-14


def test_spectral_gates():
    rng = np.random.default_rng(1)
    B = random_contraction(rng, 2, 0.5)
    with pytest.raises(SpectralRadiusError):
        solve_S(1.5 * np.eye(2), np.eye(2), B)
    # unit-circle Z is fine on its own but not against a unit-radius B
    with pytest.raises(SpectralRadiusError):
        solve_S(np.eye(2), np.eye(2), np.eye(2))
    solve_S(np.eye(2), np.eye(2), B)


def test_series_oracle_short_sums():
    rng = np.random.default_rng(2)
    Z = random_contraction(rng, 2, 0.6)
    B = random_contraction(rng, 2, 0.6)
    A = random_dense(rng, 2)
    assert np.array_equal(series_oracle(Z, A, B, 0), A)
    assert np.max(np.abs(series_oracle(Z, A, B, 1) - (A + B @ A @ Z))) < 1e-15


# collapse identity and derivative --------------------------------------------

def test_collapse_identity_zero_z():
    rng = np.random.default_rng(4)
    A = random_dense(rng, 2)
    B = random_contraction(rng, 2, 0.7)
    T1 = random_contraction(rng, 2, 0.5)
    T2 = random_dense(rng, 2)
    lhs, rhs = series_collapse_identity(np.zeros((2, 2)), A, B, T1, T2, 40)
    assert np.max(np.abs(lhs - A @ T2)) < 1e-13
    assert np.max(np.abs(rhs - A @ T2)) < 1e-13


def test_collapse_identity_small_truncation():
    rng = np.random.default_rng(6)
    Z = random_contraction(rng, 2, 0.5)
    B = random_contraction(rng, 2, 0.5)
    T1 = random_contraction(rng, 2, 0.4)
    T2 = random_dense(rng, 2)
    A = random_dense(rng, 2)
    lhs, rhs = series_collapse_identity(Z, A, B, T1, T2, 120)
    assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_derivative_constant_inputs():
    rng = np.random.default_rng(8)
    Z = random_contraction(rng, 2, 0.8)
    B = random_contraction(rng, 2, 0.7)
    S = solve_S(Z, random_dense(rng, 2), B)
    out = solve_S_derivative(Z, np.zeros((2, 2)), B, np.zeros((2, 2)), S)
    assert np.max(np.abs(out)) == 0.0


def test_derivative_zero_z_returns_aprime():
    rng = np.random.default_rng(10)
    Aprime = random_dense(rng, 2)
    B = random_contraction(rng, 2, 0.7)
    out = solve_S_derivative(np.zeros((2, 2)), Aprime, B,
                             random_dense(rng, 2), random_dense(rng, 2))
    assert np.max(np.abs(out - Aprime)) < 1e-15


def test_derivative_matches_finite_difference():
    rng = np.random.default_rng(12)
    Z = random_contraction(rng, 2, 0.85)
    B0 = random_contraction(rng, 2, 0.6)
    B1 = random_contraction(rng, 2, 0.15)
    A0, A1 = random_dense(rng, 2), random_dense(rng, 2)
    s0, h = 0.4, 1e-6
    S0 = solve_S(Z, A0 + s0 * A1, B0 + s0 * B1)
    got = solve_S_derivative(Z, A1, B0 + s0 * B1, B1, S0)
    fd = (solve_S(Z, A0 + (s0 + h) * A1, B0 + (s0 + h) * B1)
          - solve_S(Z, A0 + (s0 - h) * A1, B0 + (s0 - h) * B1)) / (2 * h)
    assert np.max(np.abs(got - fd)) < 1e-6
