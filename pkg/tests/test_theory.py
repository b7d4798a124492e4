"""Closed-form theory.  Constants marked ORACLE were produced by
tests/oracles/derive.py (mpmath, 40 digits, quadrature / root scan) and are
frozen here."""

import math

import numpy as np
import pytest

from sepsim import theory
from sepsim.theory import G_C

# ORACLE values
GAMMA_Q_3_2 = 0.67667641618306346
GAMMA_Q_7_35 = 0.93471190297104631
S_INF_G1_K1 = 0.63212055882855768
S_INF_G5_K1 = 0.90634623461009075
S_INF_G05_K3 = 0.16166179190846827
S_INF_G03_K4 = 0.12810420242675789
SPIN_G05_INF = 0.56766764161830635
SPIN_G1_LN2 = 0.30326532985631671
SPIN_G025_MT1 = 0.74059557632887814
Q_G03 = 0.21489508035101442
Q_G05 = 0.5906229215916871
M_G01 = 0.89787650544802594
M_G03 = 0.64578762344907035
M_G05 = 0.31723180869277375
BOUND_05_05_INF = 0.19673467014368329
BOUND_025_1_2 = 0.069232504715640333


class TestGammaRatio:
    def test_single_term(self):
        assert theory.regularized_gamma_q(1, 1.0) == pytest.approx(math.exp(-1), rel=1e-15)

    @pytest.mark.parametrize("k", [1, 2, 5, 40])
    def test_zero_argument(self, k):
        assert theory.regularized_gamma_q(k, 0.0) == 1.0

    def test_oracle_values(self):
        assert theory.regularized_gamma_q(3, 2.0) == pytest.approx(GAMMA_Q_3_2, rel=1e-13)
        assert theory.regularized_gamma_q(7, 3.5) == pytest.approx(GAMMA_Q_7_35, rel=1e-13)

    def test_complement(self):
        for k, a in [(1, 0.3), (4, 2.0), (12, 30.0), (50, 3.0)]:
            assert theory.regularized_gamma_q(k, a) + theory.regularized_gamma_p(k, a) == pytest.approx(1.0, abs=1e-14)

    def test_rejects_k_zero(self):
        with pytest.raises(ValueError):
            theory.regularized_gamma_q(0, 1.0)
        with pytest.raises(ValueError):
            theory.regularized_gamma_q(2, -1.0)


class TestSteadyState:
    def test_oracle_values(self):
        assert theory.steady_state_sk(1.0, 1) == pytest.approx(S_INF_G1_K1, rel=1e-13)
        assert theory.steady_state_sk(5.0, 1) == pytest.approx(S_INF_G5_K1, rel=1e-13)
        assert theory.steady_state_sk(0.5, 3) == pytest.approx(S_INF_G05_K3, rel=1e-13)
        assert theory.steady_state_sk(0.3, 4) == pytest.approx(S_INF_G03_K4, rel=1e-13)

    @pytest.mark.parametrize("g", [0.05, 0.3, G_C, 1.0, 4.0])
    def test_normalized(self, g):
        assert theory.steady_state_distribution(g).sum() == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("g", [0.05, 0.3, G_C, 1.0, 4.0])
    def test_mean_degree(self, g):
        s = theory.steady_state_distribution(g)
        assert np.dot(np.arange(s.size), s) == pytest.approx(1 / (2 * g), abs=1e-9)

    def test_rate_equation_null_vector(self):
        for g in (0.3, 1.0):
            s = theory.rate_equation_steady_state(g, 200)
            ref = theory.steady_state_distribution(g)
            np.testing.assert_allclose(s[: ref.size], ref, atol=1e-12)


class TestSpinEntropy:
    def test_initial(self):
        for g in (0.2, 1.0, 3.0):
            assert theory.single_spin_entropy(g, 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_steady_oracle(self):
        assert theory.single_spin_entropy(0.5, math.inf) == pytest.approx(SPIN_G05_INF, rel=1e-14)
        assert theory.steady_spin_entropy(0.5) == pytest.approx(SPIN_G05_INF, rel=1e-14)
        assert round(theory.steady_spin_entropy(0.5), 4) == 0.5677

    def test_time_dependent_oracle(self):
        assert theory.single_spin_entropy(1.0, math.log(2)) == pytest.approx(SPIN_G1_LN2, rel=1e-14)
        assert theory.single_spin_entropy(1.0, math.log(2)) == pytest.approx(0.5 * math.exp(-0.5), rel=1e-14)
        assert round(theory.single_spin_entropy(1.0, math.log(2)), 4) == 0.3033
        assert theory.single_spin_entropy(0.25, 1.0) == pytest.approx(SPIN_G025_MT1, rel=1e-14)

    def test_long_time_limit(self):
        for g in (0.3, 1.0, 2.0):
            assert theory.single_spin_entropy(g, 60.0) == pytest.approx(theory.steady_spin_entropy(g), abs=1e-15)

    def test_equals_one_minus_s1(self):
        # the spin entropy is the density of nodes with at least one bond
        for g, tau in [(0.5, 1.0), (1.5, 3.0)]:
            s1 = theory.series_coefficients(g, tau, 1)[0]
            mt = g * tau  # Gamma_m t = g * (2 Gamma_u t)
            assert 1 - s1 == pytest.approx(theory.single_spin_entropy(g, mt), abs=1e-10)


class TestGeneratingFunction:
    @pytest.mark.parametrize("tau", [0.0, 0.3, 2.0, 15.0, math.inf])
    def test_normalized(self, tau):
        assert theory.generating_function(0.7, 1.0, tau) == pytest.approx(1.0, abs=1e-14)

    def test_initial_condition(self):
        z = np.linspace(-1, 1, 9)
        np.testing.assert_allclose(theory.generating_function(0.4, z, 0.0), z, atol=1e-15)

    def test_steady_coefficient(self):
        c = theory.series_coefficients(1.0, math.inf, 5)
        assert c[0] == pytest.approx(S_INF_G1_K1, abs=1e-13)
        np.testing.assert_allclose(c, [theory.steady_state_sk(1.0, k) for k in range(1, 6)], atol=1e-13)

    def test_rejects_outside_disk(self):
        with pytest.raises(ValueError):
            theory.generating_function(1.0, 1.5, 1.0)


class TestMeanClusterSize:
    def test_value(self):
        assert theory.mean_cluster_size(4 / 3) == pytest.approx(2.0, rel=1e-14)

    def test_isolated_limit(self):
        assert theory.mean_cluster_size(1e9) == pytest.approx(1.0, rel=1e-8)

    def test_diverges(self):
        assert math.isinf(theory.mean_cluster_size(G_C))
        assert math.isinf(theory.mean_cluster_size(0.3))

    @pytest.mark.parametrize("g", [0.3, 0.9, 2.0])
    def test_criticality_identity(self, g):
        nd = theory.neighbor_distributions(g)
        k = np.arange(nd.P.size)
        assert np.dot(k - 1, nd.P) == pytest.approx(G_C / g, abs=1e-9)

    @pytest.mark.parametrize("g", [0.3, 0.9, 2.0])
    def test_neighbor_laws_normalized(self, g):
        nd = theory.neighbor_distributions(g)
        assert nd.Q.sum() == pytest.approx(1.0, abs=1e-10)
        assert nd.P.sum() == pytest.approx(1.0, abs=1e-10)


class TestRootAndMass:
    @pytest.mark.parametrize("g", [G_C, 0.7, 1.0, 5.0])
    def test_q_is_one_above(self, g):
        assert theory.solve_root_q(g) == 1.0
        assert theory.giant_mass(g) == 0.0

    def test_oracle_roots(self):
        assert theory.solve_root_q(0.3) == pytest.approx(Q_G03, abs=1e-13)
        assert theory.solve_root_q(0.5) == pytest.approx(Q_G05, abs=1e-13)
        assert abs(theory._q_residual(theory.solve_root_q(0.3), 0.3)) < 1e-12

    @pytest.mark.parametrize("g", [0.2, 0.3, 0.5, 0.6])
    def test_self_consistency(self, g):
        nd = theory.neighbor_distributions(g)
        q = theory.solve_root_q(g)
        # q = sum_k P_{k+1} q^k
        assert np.dot(nd.P[1:], q ** np.arange(nd.P.size - 1)) == pytest.approx(q, abs=1e-8)

    def test_oracle_mass(self):
        assert theory.giant_mass(0.1) == pytest.approx(M_G01, abs=1e-13)
        assert theory.giant_mass(0.3) == pytest.approx(M_G03, abs=1e-13)
        assert theory.giant_mass(0.5) == pytest.approx(M_G05, abs=1e-13)

    def test_continuous_at_critical_point(self):
        assert theory.giant_mass(G_C - 1e-9) < 1e-8

    def test_critical_slope(self):
        eps = 1e-4
        assert theory.giant_mass(G_C - eps) / eps == pytest.approx(2.0, rel=0.01)

    def test_monotone(self):
        gs = np.linspace(0.02, G_C, 200)
        m = np.array([theory.giant_mass(g) for g in gs])
        assert np.all(np.diff(m) <= 1e-15)


class TestBound:
    def test_zero_fraction(self):
        assert theory.entanglement_upper_bound(0.0, 0.7, 3.0) == 0.0

    def test_zero_time(self):
        assert theory.entanglement_upper_bound(0.3, 0.7, 0.0) == 0.0

    def test_oracle_values(self):
        assert theory.entanglement_upper_bound(0.5, 0.5, math.inf) == pytest.approx(BOUND_05_05_INF, rel=1e-14)
        assert round(theory.entanglement_upper_bound(0.5, 0.5, math.inf), 5) == 0.19673
        assert theory.entanglement_upper_bound(0.25, 1.0, 2.0) == pytest.approx(BOUND_025_1_2, rel=1e-14)

    def test_rejects_large_fraction(self):
        with pytest.raises(ValueError):
            theory.entanglement_upper_bound(0.6, 1.0, 1.0)


class TestRateEquation:
    def test_columns_conserve_probability(self):
        r = theory.rate_matrix(0.8, 50)
        np.testing.assert_allclose(r.sum(axis=0), 0.0, atol=1e-12)

    def test_initial_state(self):
        s = theory.integrate_rate_equation(1.0, [0.0], 20)
        np.testing.assert_array_equal(s[0], np.eye(20)[0])

    def test_theory_point(self):
        tp = theory.theory_point(0.5)
        assert tp.spin_entropy == pytest.approx(SPIN_G05_INF)
        assert tp.giant_mass == pytest.approx(M_G05)
        assert math.isinf(tp.mean_cluster_size)
