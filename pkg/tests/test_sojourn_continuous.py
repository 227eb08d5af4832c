"""Transform, marginal z-transform, and mean for continuous inspection."""

import numpy as np
import pytest

import oracles
from thresholdq import (DomainError, QueueParams, RegimeError,
                        mean_sojourn_continuous, moment,
                        sojourn_lt_continuous, stationary_continuous)
from thresholdq.sojourn_continuous import (ScalarCoefficients, phi_marginal,
                                           psi_boundary, psi_grid)

P2 = QueueParams(lam=0.5, mu0=1.0, mu1=1.5, K=2, regime="continuous")


# coefficients ----------------------------------------------------------------

def test_coefficient_products_match_closed_form():
    rng = np.random.default_rng(0)
    for _ in range(5):
        s = complex(rng.uniform(0.0, 3.0), rng.uniform(-2.0, 2.0))
        coeff = ScalarCoefficients(P2, s)
        for k in range(2 * P2.K + 3):
            assert coeff.B_product(k, 0) == 1.0
            for h in range(2 * P2.K + 3):
                assert coeff.B(k, h) == pytest.approx(coeff.B_product(k, h), abs=1e-14)


def test_coefficient_derivatives_at_zero():
    coeff = ScalarCoefficients(P2, 0.0)
    h = 1e-6
    for k in range(6):
        fd_a = (ScalarCoefficients(P2, h).a(k) - ScalarCoefficients(P2, -h).a(k)).real / (2 * h)
        fd_b = (ScalarCoefficients(P2, h).b(k) - ScalarCoefficients(P2, -h).b(k)).real / (2 * h)
        assert coeff.a_prime0(k) == pytest.approx(fd_a, abs=1e-8)
        assert coeff.b_prime0(k) == pytest.approx(fd_b, abs=1e-8)
        fd_B = (ScalarCoefficients(P2, h).B(k, 3) - ScalarCoefficients(P2, -h).B(k, 3)).real / (2 * h)
        assert coeff.B_prime0(k, 3) == pytest.approx(fd_B, abs=1e-8)


# boundary and grid -----------------------------------------------------------

def test_boundary_values():
    assert psi_boundary(0, 0.7, P2) == 1.0
    p = QueueParams(lam=0.5, mu0=1.0, mu1=1.5, K=1, regime="continuous")
    assert psi_boundary(1, 0.5, p) == pytest.approx(0.75, abs=1e-15)
    assert psi_boundary(3, 0.0, p) == pytest.approx(1.0, abs=1e-15)


def test_grid_at_zero_is_all_ones():
    grid = psi_grid(P2, 0.0)
    for n in range(0, 6):
        for m in range(0, 6):
            assert grid.value(n, m) == pytest.approx(1.0, abs=1e-13)


def test_grid_single_step_identity():
    # K=1: psi(1,0) = a(1) + b(1) * boundary(1)
    p = QueueParams(lam=0.5, mu0=1.0, mu1=1.5, K=1, regime="continuous")
    s = 0.8
    coeff = ScalarCoefficients(p, s)
    grid = psi_grid(p, s)
    expected = coeff.a(1) + coeff.b(1) * psi_boundary(1, s, p)
    assert grid.value(1, 0) == pytest.approx(expected, abs=1e-15)


def test_grid_against_truncated_lattice():
    grid = psi_grid(P2, 1.0)
    for n in range(1, P2.K + 4):
        for m in range(0, P2.K + 1):
            want = oracles.lattice_psi_cell(P2, 1.0, n, m)[0]
            assert grid.value(n, m) == pytest.approx(want, abs=1e-10), (n, m)


def test_lattice_oracle_truncation_is_stable():
    a = oracles.lattice_psi(P2, 1.0, 4, m_max=200)[3, 0, 0, 0]
    b = oracles.lattice_psi(P2, 1.0, 4, m_max=400)[3, 0, 0, 0]
    assert abs(a - b) < 1e-12


def test_grid_k0_is_boundary_only():
    p = QueueParams(lam=0.5, mu0=1.0, mu1=1.5, K=0, regime="continuous")
    grid = psi_grid(p, 2.0)
    beta = p.mu1 / (p.mu1 + 2.0)
    for n in range(4):
        assert grid.value(n, 0) == pytest.approx(beta ** n, abs=1e-15)


# marginal z-transform ---------------------------------------------------------

def test_phi_domain_checks():
    grid = psi_grid(P2, 1.0)
    with pytest.raises(DomainError):
        phi_marginal(1.0, 0, 1.0, grid, P2)
    with pytest.raises(DomainError):
        phi_marginal(0.3, P2.K + 1, 1.0, grid, P2)


def test_phi_boundary_row():
    s = 1.2
    grid = psi_grid(P2, s)
    z = 0.4
    expected = ((P2.mu1 / (P2.mu1 + s)) ** (P2.K + 1)
                * (P2.mu1 + s) / (P2.mu1 * (1 - z) + s))
    assert phi_marginal(z, P2.K, s, grid, P2) == pytest.approx(expected, abs=1e-14)


def test_phi_at_zero_is_next_level():
    s = 0.9
    grid = psi_grid(P2, s)
    for m in range(P2.K + 1):
        assert phi_marginal(0.0, m, s, grid, P2) == pytest.approx(
            grid.value(P2.K + 1, m), abs=1e-14)


@pytest.mark.parametrize("z", [0.5 / 1.5, 0.21, -0.35])
def test_phi_matches_truncated_definition(z):
    # z = lam/mu1 is the value the final assembly actually uses
    s = 1.0
    grid = psi_grid(P2, s)
    for m in range(P2.K + 1):
        direct = sum(grid.value(P2.K + h + 1, m) * z ** h for h in range(250))
        assert phi_marginal(z, m, s, grid, P2) == pytest.approx(direct, abs=1e-10)


# assembled transform ----------------------------------------------------------

def test_k0_reduces_to_fast_queue():
    p = QueueParams(lam=0.5, mu0=1.0, mu1=1.5, K=0, regime="continuous")
    assert sojourn_lt_continuous(p, 1.0) == pytest.approx(0.5, abs=1e-14)


def test_transform_at_zero_is_one():
    assert sojourn_lt_continuous(P2, 0.0) == pytest.approx(1.0, abs=1e-13)


def test_transform_against_direct_mixture():
    s = 1.0
    grid = psi_grid(P2, s)
    st = stationary_continuous(P2)
    direct = sum(grid.value(n + 1, 0) * st.probability(n) for n in range(400))
    assert sojourn_lt_continuous(P2, s) == pytest.approx(direct, abs=1e-10)


def test_transform_against_independent_oracle():
    s_pts = np.array([0.4, 1.0, 2.5])
    got = sojourn_lt_continuous(P2, s_pts)
    want = oracles.oracle_sojourn_lt(P2, s_pts)
    assert np.max(np.abs(got - want)) < 1e-10


def test_transform_monotone_and_bounded():
    s = np.linspace(0.05, 8.0, 40)
    vals = sojourn_lt_continuous(P2, s).real
    assert np.all(vals > 0) and np.all(vals <= 1)
    assert np.all(np.diff(vals) < 0)


def test_pole_at_negative_decay_rate():
    pole = -(P2.mu1 - P2.lam)
    assert abs(sojourn_lt_continuous(P2, pole + 1e-8)) > 1e6


def test_tail_addend_has_probabilistic_form():
    """Last assembled term = P(queue >= 2K at arrival) times the transform of
    two Erlang(K, mu1) stages plus an Exp(mu1 - lam) tail."""
    st = stationary_continuous(P2)
    tail_prob = st.probability(2 * P2.K) / (1 - P2.lam / P2.mu1)
    for s in (0.3, 1.0, 2.7):
        grid = psi_grid(P2, s)
        beta = P2.mu1 / (P2.mu1 + s)
        first = sum((P2.lam / P2.mu0) ** h * grid.value(h + 1, 0)
                    for h in range(P2.K)) * st.pi0
        second = sum((P2.lam / P2.mu0) ** P2.K * (P2.lam / P2.mu1) ** h
                     * beta ** (h + 1) * grid.value(P2.K, h)
                     for h in range(P2.K)) * st.pi0
        third = sojourn_lt_continuous(P2, s) - first - second
        interp = tail_prob * beta ** (2 * P2.K) * (P2.mu1 - P2.lam) / (P2.mu1 - P2.lam + s)
        assert third == pytest.approx(interp, abs=1e-12)


# mean ---------------------------------------------------------------------

def test_mean_k0():
    p = QueueParams(lam=0.5, mu0=1.0, mu1=1.5, K=0, regime="continuous")
    assert mean_sojourn_continuous(p) == pytest.approx(1.0, abs=1e-12)


def test_mean_matches_transform_derivative():
    got = mean_sojourn_continuous(P2)
    fd = moment(lambda s: sojourn_lt_continuous(P2, s), order=1, step=1e-5)
    assert got == pytest.approx(fd, abs=1e-6)


def test_mean_huge_threshold_is_slow_queue():
    p = QueueParams(lam=0.5, mu0=1.0, mu1=1.5, K=200, regime="continuous")
    assert mean_sojourn_continuous(p) == pytest.approx(2.0, abs=1e-3)


def test_regime_guard():
    with pytest.raises(RegimeError):
        sojourn_lt_continuous(
            QueueParams(lam=0.5, mu0=1.0, mu1=1.5, K=1,
                        regime="exponential", gamma=1.0), 1.0)
