"""Fast internal consistency checks behind ``sepsim selftest``."""

from __future__ import annotations

import math

import numpy as np

from .. import dense, iqp, theory
from .._backend import COMPILED_AVAILABLE, get_backend
from ..dynamics import DynamicsParams, simulate
from ..graph_state import apply_two_qubit_gate, bipartite_entropy_clifford, measure_z_and_reset, new_product_state
from ..percolation import collapse_quality
from ..tableau import from_graph_state, subsystem_entropy


def _random_circuit(n, mode, rng, ops=30):
    st = new_product_state(n, mode, log=True)
    for _ in range(ops):
        if rng.random() < 0.6:
            i, j = rng.choice(n, 2, replace=False)
            a = math.pi if mode == "clifford" else float(rng.uniform(0, 2 * math.pi))
            apply_two_qubit_gate(st, int(i), int(j), a)
        else:
            measure_z_and_reset(st, int(rng.integers(n)), rng)
    return st


def check_theory():
    s = theory.steady_state_distribution(0.5)
    ok = abs(s.sum() - 1) < 1e-12 and abs(theory.steady_spin_entropy(0.5) - 0.5676676416183064) < 1e-12
    ok &= abs(theory.single_spin_entropy(1.0, math.log(2)) - 0.30326532985631666) < 1e-12
    return ok, f"sum s_k={s.sum():.15f}"


def check_rate_equation():
    taus = [0.5, 2.0, 8.0]
    ode = theory.integrate_rate_equation(0.5, taus, kmax=120)
    err = max(np.max(np.abs(ode[i, :60] - theory.series_coefficients(0.5, t, 60))) for i, t in enumerate(taus))
    return err < 1e-6, f"max |ODE - series| = {err:.2e}"


def check_backends():
    if not COMPILED_AVAILABLE:
        return True, "compiled core not built; skipped"
    p = DynamicsParams(3, 2, burn_in_timesteps=200, master_seed=7)
    _, a, _ = simulate(64, p, 3, backend="python")
    _, b, _ = simulate(64, p, 3, backend="compiled")
    same = a.edges() == b.edges() and np.array_equal(a.w, b.w)
    return same, "python and compiled trajectories identical" if same else "trajectories differ"


def check_entropies(rng):
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 9))
        st = _random_circuit(n, "clifford", rng)
        tab = from_graph_state(st)
        d = dense.replay(st)
        a = [int(i) for i in np.flatnonzero(rng.integers(0, 2, n))]
        e1 = bipartite_entropy_clifford(st, a)
        e2 = subsystem_entropy(tab, a)
        e3 = dense.von_neumann_entropy_dense(d, a)
        if e1 != e2:
            return False, f"rank {e1} != tableau {e2}"
        worst = max(worst, abs(e3 - e1))
    return worst < 1e-9, f"max dense deviation {worst:.1e}"


def check_purity(rng):
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 9))
        st = _random_circuit(n, "iqp", rng)
        d = dense.replay(st)
        a = [int(rng.integers(n))]
        worst = max(worst, abs(iqp.purity(st, a) - dense.purity_dense(d, a)))
    return worst < 1e-10, f"max deviation {worst:.1e}"


def check_tree(rng):
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 10))
        st = new_product_state(n, "iqp")
        for u, v in iqp.random_tree_edges(n, rng):
            apply_two_qubit_gate(st, u, v, float(rng.uniform(0.1, 2 * math.pi - 0.1)))
        sym = iqp.ising_symmetrize(st)
        worst = max(worst, abs(iqp.return_probability_tree(sym) - iqp.return_probability_bruteforce(sym)))
    return worst < 1e-10, f"max deviation {worst:.1e}"


def check_collapse():
    g = np.repeat(np.linspace(0.5, 0.85, 12), 3)
    n = np.tile([250.0, 1000.0, 4000.0], 12)
    x = n ** (1 / 3) * (g - theory.G_C)
    y = n ** (-1 / 3) * np.exp(-x ** 2)
    s = collapse_quality(g, n, y, 1 / 3, 1 / 3)
    return s < 1e-6, f"exact-scaling score {s:.1e}"


def run_all(seed: int = 0):
    rng = np.random.default_rng(seed)
    checks = [
        ("theory spot values", check_theory),
        ("rate equation vs generating function", check_rate_equation),
        ("backend equivalence", check_backends),
        ("clifford entropies: rank, tableau, dense", lambda: check_entropies(rng)),
        ("iqp purity vs dense", lambda: check_purity(rng)),
        ("tree return probability", lambda: check_tree(rng)),
        ("collapse self-test", check_collapse),
    ]
    out = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # report, don't abort the battery
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), f"{detail} [{get_backend().BACKEND}]"))
    return out
