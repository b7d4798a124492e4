"""Randomized invariants over states, dynamics and the closed-form theory."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepsim import (
    DynamicsParams,
    apply_two_qubit_gate,
    bipartite_entropy_clifford,
    cluster_statistics,
    dense,
    from_graph_state,
    iqp,
    is_separable,
    measure_pauli,
    measure_z_and_reset,
    new_product_state,
    run_ensemble,
    subsystem_entropy,
    theory,
)
from sepsim.dynamics import simulate

TWO_PI = 2 * math.pi


@st.composite
def circuits(draw, modes=("clifford", "iqp", "idealized-graph"), n_max=10):
    """(mode, state) after a drawn sequence of gates and measure-and-resets."""
    mode = draw(st.sampled_from(modes))
    n = draw(st.integers(2, n_max))
    state = new_product_state(n, mode, log=True)
    ops = draw(st.lists(
        st.tuples(st.booleans(), st.integers(0, n - 1), st.integers(0, n - 2),
                  st.floats(0.01, TWO_PI - 0.01), st.integers(0, 1)),
        max_size=6 * n))
    for is_gate, i, j, a, s in ops:
        if is_gate:
            j = j + 1 if j >= i else j
            apply_two_qubit_gate(state, i, j, a if mode == "iqp" else math.pi)
        else:
            measure_z_and_reset(state, i, outcome=s)
    return mode, state


subsets = st.integers(1, 2 ** 10 - 1)


def subset_of(mask, n):
    a = [q for q in range(n) if (mask >> q) & 1]
    return a if 0 < len(a) < n else [0]


class TestStateInvariants:
    @given(circuits(n_max=14))
    def test_theta_symmetric_reduced(self, c):
        mode, state = c
        th = state.theta
        np.testing.assert_array_equal(th, th.T)
        assert np.all(np.diag(th) == 0)
        assert np.all((th >= 0) & (th < TWO_PI))
        w = state.w
        assert np.all((w >= 0) & (w < TWO_PI))
        if mode != "iqp":
            assert set(np.unique(th)) <= {0.0, math.pi}

    @given(circuits(n_max=14), st.data())
    def test_measure_leaves_other_bonds(self, c, data):
        _, state = c
        k = data.draw(st.integers(0, state.n - 1))
        before = state.theta
        nbrs = state.neighbors(k)
        w0 = state.w
        s = data.draw(st.integers(0, 1))
        measure_z_and_reset(state, k, outcome=s)
        after = state.theta
        keep = np.ones(state.n, dtype=bool)
        keep[k] = False
        np.testing.assert_array_equal(after[np.ix_(keep, keep)], before[np.ix_(keep, keep)])
        assert not np.any(after[k])
        assert state.w[k] == 0
        for i in range(state.n):
            if i == k:
                continue
            expect = (w0[i] + s * before[k, i]) % TWO_PI if i in nbrs else w0[i]
            assert math.isclose(state.w[i], expect, abs_tol=1e-9) or \
                math.isclose(abs(state.w[i] - expect), TWO_PI, abs_tol=1e-9)

    @given(circuits(modes=("clifford", "idealized-graph"), n_max=40))
    def test_degrees_match_adjacency(self, c):
        _, state = c
        np.testing.assert_array_equal(state.degrees(), state.adjacency.sum(axis=1))

    @settings(max_examples=60)
    @given(circuits(modes=("iqp",), n_max=10), subsets)
    def test_separable_iff_pure(self, c, mask):
        _, state = c
        a = subset_of(mask, state.n)
        p = dense.purity_dense(dense.replay(state), a)
        if is_separable(state, a):
            assert p == pytest.approx(1.0, abs=1e-10)
        else:
            assert p < 1 - 1e-10

    @settings(max_examples=60)
    @given(circuits(modes=("iqp",), n_max=10), subsets)
    def test_purity_matches_dense(self, c, mask):
        _, state = c
        a = subset_of(mask, state.n)
        assert iqp.purity(state, a) == pytest.approx(dense.purity_dense(dense.replay(state), a), abs=1e-10)

    @settings(max_examples=60)
    @given(circuits(modes=("clifford",), n_max=10), subsets)
    def test_rank_entropy_matches_dense(self, c, mask):
        _, state = c
        a = subset_of(mask, state.n)
        s = bipartite_entropy_clifford(state, a)
        assert s == subsystem_entropy(from_graph_state(state), a)
        assert dense.von_neumann_entropy_dense(dense.replay(state), a) == pytest.approx(s, abs=1e-9)

    @settings(max_examples=40)
    @given(circuits(modes=("iqp",), n_max=10))
    def test_z_marginals_fair(self, c):
        _, state = c
        np.testing.assert_allclose(iqp.z_marginals(state), 0.5, atol=1e-12)


class TestTableauInvariants:
    @settings(max_examples=50)
    @given(circuits(modes=("clifford",), n_max=9),
           st.lists(st.tuples(st.integers(0, 8), st.sampled_from("XYZ"), st.integers(0, 2 ** 32 - 1)),
                    max_size=12))
    def test_valid_after_measurements(self, c, meas):
        _, state = c
        tab = from_graph_state(state)
        for q, ax, seed in meas:
            measure_pauli(tab, q % state.n, ax, np.random.default_rng(seed))
            assert tab.is_valid()

    @settings(max_examples=50)
    @given(circuits(modes=("clifford",), n_max=9), st.integers(0, 8), st.sampled_from("XYZ"))
    def test_measurement_fair_or_certain(self, c, q, ax):
        # random outcomes occur only when both branches are equally likely
        _, state = c
        q %= state.n
        tab = from_graph_state(state)
        _, det = measure_pauli(tab.copy(), q, ax, np.random.default_rng(0), return_deterministic=True)
        psi = dense.replay(state)
        probs = []
        for o in (0, 1):
            d = psi.copy()
            try:
                d.measure(q, ax, outcome=o)
                probs.append(1.0)
            except ValueError:
                probs.append(0.0)
        assert det == (min(probs) == 0.0)


class TestTheoryInvariants:
    @given(st.floats(0.05, 20.0))
    def test_steady_state_normalized(self, g):
        s = theory.steady_state_distribution(g)
        assert np.all(s >= 0)
        assert s.sum() == pytest.approx(1.0, abs=1e-10)
        k = np.arange(1, s.size + 1)
        assert np.sum((k - 1) * s) == pytest.approx(theory.mean_degree(g), abs=1e-9)

    @given(st.floats(0.05, 20.0))
    def test_neighbor_distributions_normalized(self, g):
        nd = theory.neighbor_distributions(g)
        assert nd.Q.sum() == pytest.approx(1.0, abs=1e-10)
        assert nd.P.sum() == pytest.approx(1.0, abs=1e-10)

    @given(st.floats(0.05, 5.0), st.floats(0.0, 30.0))
    def test_rate_equation_conserves_mass(self, g, tau):
        s = theory.integrate_rate_equation(g, [tau], kmax=120)[0]
        assert s.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(s > -1e-12)

    @given(st.floats(0.05, 5.0))
    def test_giant_mass_range(self, g):
        m = theory.giant_mass(g)
        assert 0.0 <= m < 1.0
        if g >= theory.G_C:
            assert m == 0.0
        else:
            assert m > 0.0

    @given(st.floats(0.05, 5.0), st.floats(0.0, 20.0))
    def test_spin_entropy_bounds(self, g, mt):
        v = theory.single_spin_entropy(g, mt)
        assert 0.0 <= v <= theory.steady_spin_entropy(g) + 1e-15

    @given(st.floats(0.01, 0.5), st.floats(0.05, 5.0), st.floats(0.0, 20.0))
    def test_bound_range(self, q, g, mt):
        b = theory.entanglement_upper_bound(q, g, mt)
        assert 0.0 <= b <= q + 1e-15


class TestDynamicsInvariants:
    @settings(max_examples=25)
    @given(st.floats(0.2, 2.5), st.integers(10, 120), st.integers(0, 2 ** 63 - 1))
    def test_mass_balance_and_degree_sum(self, g, n, seed):
        p = DynamicsParams.from_g(g, master_seed=seed, burn_in_timesteps=40)
        records, state, _ = simulate(n, p)
        c = records[-1].clusters
        assert c.m + sum(k * v for k, v in c.n_k.items()) == pytest.approx(1.0, abs=1e-12)
        assert records[-1].degrees.s.sum() == pytest.approx(1.0, abs=1e-12)
        assert c.largest_size == cluster_statistics(state).largest_size

    @settings(max_examples=8)
    @given(st.floats(0.3, 1.5), st.integers(0, 2 ** 32), st.sampled_from([2, 3, 5]))
    def test_thread_count_independent(self, g, seed, threads):
        p = DynamicsParams.from_g(g, master_seed=seed, burn_in_timesteps=30)

        def red(records, state, rng):
            return [records[-1].clusters.chi, records[-1].spin_entropy, rng.next_u64() % 1000]

        a = run_ensemble(60, p, 7, red, threads=1)
        b = run_ensemble(60, p, 7, red, threads=threads)
        np.testing.assert_array_equal(a.values, b.values)
