import math

import numpy as np
import pytest

from conftest import graph, random_circuit
from sepsim import dense, iqp, new_product_state
from sepsim.dynamics import DynamicsParams, simulate

PI = math.pi


class TestAmplitude:
    def test_product_modulus(self):
        st = new_product_state(5, "iqp")
        assert abs(iqp.amplitude(st, [1, 0, 1, 1, 0])) == pytest.approx(2 ** -2.5)

    def test_phase_of_edge(self):
        st = graph(2, [(0, 1)], mode="iqp")
        ratio = iqp.amplitude(st, [1, 1]) / iqp.amplitude(st, [0, 0])
        assert ratio == pytest.approx(-1.0)
        assert iqp.amplitude(st, [1, 0]) / iqp.amplitude(st, [0, 0]) == pytest.approx(1.0)

    def test_statevector_matches_amplitudes(self, rng):
        st = random_circuit(6, "iqp", rng)
        psi = iqp.statevector(st)
        for idx in rng.integers(0, 64, size=10):
            bits = [(int(idx) >> (5 - q)) & 1 for q in range(6)]
            assert psi[idx] == pytest.approx(iqp.amplitude(st, bits), abs=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    def test_normalized(self, seed):
        st = random_circuit(12, "iqp", np.random.default_rng(seed))
        assert np.sum(np.abs(iqp.statevector(st)) ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_bad_bitstring(self):
        with pytest.raises(ValueError):
            iqp.amplitude(new_product_state(2, "iqp"), [0, 2])

    def test_large_single_amplitude_allowed(self):
        st = new_product_state(40, "iqp")
        assert abs(iqp.amplitude(st, [0] * 40)) == pytest.approx(2 ** -20)
        with pytest.raises(ValueError):
            iqp.statevector(st)


class TestPurity:
    def test_separable_cut(self):
        st = graph(4, [(0, 1, 0.3), (2, 3, 1.1)], mode="iqp")
        assert iqp.purity(st, [0, 1]) == 1.0

    def test_single_pi_edge(self):
        st = graph(2, [(0, 1)], mode="iqp", log=True)
        assert iqp.purity(st, [0]) == pytest.approx(0.5, abs=1e-15)
        assert dense.purity_dense(dense.replay(st), [0]) == pytest.approx(0.5, abs=1e-14)

    def test_single_generic_edge(self):
        # one bond of angle a: Tr rho^2 = (1 + cos^2(a/2)) / 2
        a = 1.234
        st = graph(2, [(0, 1, a)], mode="iqp")
        assert iqp.purity(st, [0]) == pytest.approx((1 + math.cos(a / 2) ** 2) / 2, abs=1e-14)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_dense_single_sites(self, seed):
        st = random_circuit(8, "iqp", np.random.default_rng(seed))
        d = dense.replay(st)
        for k in range(8):
            assert iqp.purity(st, [k]) == pytest.approx(dense.purity_dense(d, [k]), abs=1e-10)

    def test_symmetric_in_sides(self, rng):
        st = random_circuit(7, "iqp", rng)
        assert iqp.purity(st, [0, 3]) == pytest.approx(iqp.purity(st, [1, 2, 4, 5, 6]), abs=1e-13)

    def test_independent_blocks_factorize(self):
        # fifteen separate bonds across the cut: each block is tiny
        pairs = [(2 * i, 2 * i + 1, 0.9) for i in range(15)]
        st = graph(30, pairs, mode="iqp")
        expect = ((1 + math.cos(0.45) ** 2) / 2) ** 15
        assert iqp.purity(st, range(0, 30, 2)) == pytest.approx(expect, rel=1e-12)

    def test_oversize_rejected(self):
        # one connected block with 15 spins on each side of the cut
        edges = [(i, i + 15, 0.9) for i in range(15)] + [(i, i + 16, 0.4) for i in range(14)]
        st = graph(30, edges, mode="iqp")
        with pytest.raises(ValueError):
            iqp.purity(st, range(15))


class TestSymmetrize:
    def test_product(self):
        sym = iqp.ising_symmetrize(new_product_state(3, "iqp"))
        np.testing.assert_array_equal(sym.z, [0, 0, 0])
        np.testing.assert_allclose(sym.statevector(), np.full(8, 8 ** -0.5))

    def test_single_edge(self):
        sym = iqp.ising_symmetrize(graph(2, [(0, 1)], mode="iqp"))
        np.testing.assert_allclose(sym.z, [PI / 2, PI / 2])

    @pytest.mark.parametrize("seed", range(6))
    def test_parity_is_one_iqp(self, seed):
        st = random_circuit(10, "iqp", np.random.default_rng(seed))
        assert iqp.parity_expectation(iqp.ising_symmetrize(st)) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("seed", range(4))
    def test_parity_is_one_clifford_steady_state(self, seed):
        p = DynamicsParams(1, 1, master_seed=seed)
        _, st, _ = simulate(12, p)
        assert iqp.parity_expectation(iqp.ising_symmetrize(st)) == pytest.approx(1.0, abs=1e-10)


class TestReturnProbability:
    def test_product(self):
        sym = iqp.ising_symmetrize(new_product_state(4, "iqp"))
        assert iqp.return_probability_bruteforce(sym) == 1.0
        assert iqp.return_probability_tree(sym) == 1.0

    def test_single_edge(self):
        sym = iqp.ising_symmetrize(graph(2, [(0, 1)], mode="iqp"))
        assert iqp.return_probability_bruteforce(sym) == pytest.approx(0.5, abs=1e-15)
        assert iqp.return_probability_tree(sym) == pytest.approx(math.cos(PI / 4) ** 2, abs=1e-15)

    def test_two_disjoint_edges(self):
        sym = iqp.ising_symmetrize(graph(4, [(0, 1), (2, 3)], mode="iqp"))
        assert iqp.return_probability_bruteforce(sym) == pytest.approx(0.25, abs=1e-15)

    def test_two_edge_star(self):
        sym = iqp.ising_symmetrize(graph(3, [(0, 1), (0, 2)], mode="iqp"))
        assert iqp.return_probability_tree(sym) == pytest.approx(0.25, abs=1e-15)
        assert iqp.return_probability_bruteforce(sym) == pytest.approx(0.25, abs=1e-14)

    def test_bruteforce_equals_full_overlap(self, rng):
        # componentwise evaluation equals the global overlap with |+...+>
        st = random_circuit(9, "iqp", rng)
        sym = iqp.ising_symmetrize(st)
        phi = sym.statevector()
        full = abs(phi.sum() / math.sqrt(phi.size)) ** 2
        assert iqp.return_probability_bruteforce(sym) == pytest.approx(full, abs=1e-12)

    def test_w_drops_out(self):
        st = graph(3, [(0, 1, 0.8), (1, 2, 2.0)], mode="iqp")
        ref = iqp.return_probability_bruteforce(iqp.ising_symmetrize(st))
        st.set_w(1, 1.7)
        assert iqp.return_probability_bruteforce(iqp.ising_symmetrize(st)) == pytest.approx(ref, abs=1e-14)

    def test_triangle_rejects_tree_formula(self):
        sym = iqp.ising_symmetrize(graph(3, [(0, 1), (1, 2), (0, 2)], mode="iqp"))
        with pytest.raises(ValueError):
            iqp.return_probability_tree(sym)
        assert iqp.return_probability_bruteforce(sym) == pytest.approx(0.25, abs=1e-14)
        assert iqp.tree_formula([PI] * 3) == pytest.approx(0.125, abs=1e-15)

    def test_oversize_component(self):
        edges = [(i, i + 1, 0.5) for i in range(25)]
        sym = iqp.ising_symmetrize(graph(26, edges, mode="iqp"))
        with pytest.raises(ValueError):
            iqp.return_probability_bruteforce(sym)
        assert iqp.return_probability_tree(sym) == pytest.approx(math.cos(0.125) ** 50)

    def test_component_table(self):
        st = graph(6, [(0, 1), (2, 3), (3, 4), (2, 4)], mode="iqp")
        rows = iqp.component_return_probabilities(st)
        assert [(r[0], r[1]) for r in rows] == [(2, False), (3, True)]
        assert rows[0][2] == pytest.approx(rows[0][3])


class TestCycles:
    def test_triangle(self):
        assert iqp.has_cycle([(0, 1), (1, 2), (0, 2)])

    def test_path(self):
        assert not iqp.has_cycle([(0, 1), (1, 2), (2, 3), (3, 4)])

    def test_two_edges(self):
        assert not iqp.has_cycle([(0, 1), (2, 3)])

    def test_restricted_nodes(self):
        edges = [(0, 1), (2, 3), (3, 4), (2, 4)]
        assert not iqp.has_cycle(edges, nodes=[0, 1])
        assert iqp.has_cycle(edges, nodes=[2, 3, 4])

    def test_state_input(self):
        assert iqp.has_cycle(graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)], mode="iqp"))

    @pytest.mark.parametrize("n", [2, 3, 7, 12])
    def test_random_tree_is_tree(self, n, rng):
        edges = iqp.random_tree_edges(n, rng)
        assert len(edges) == n - 1
        assert not iqp.has_cycle(edges)


class TestMarginals:
    @pytest.mark.parametrize("seed", range(4))
    def test_z_marginals_half(self, seed):
        st = random_circuit(12, "iqp", np.random.default_rng(seed))
        np.testing.assert_allclose(iqp.z_marginals(st), 0.5, atol=1e-12)
