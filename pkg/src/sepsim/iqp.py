"""Exact amplitude-level quantities for IQP states: wavefunction, purity,
Ising symmetrization and return probabilities.

Quadratic-form convention: theta is symmetric with zero diagonal and every
unordered pair contributes theta_nm s_n s_m once, s in {0, 1}.  Basis index
ordering is big-endian: qubit 0 is the most significant bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph_state import EvolvedState, connected_components

MAX_STATEVECTOR_QUBITS = 24
MAX_PURITY_SIDE = 14
MAX_COMPONENT = 24
_CHUNK = 1 << 18
_ZERO_ATOL = 1e-12


def bit_table(n: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Rows are the bitstrings of basis indices [start, stop), shape (count, n)."""
    stop = (1 << n) if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def _phase_of(theta_upper: np.ndarray, lin: np.ndarray, bits: np.ndarray) -> np.ndarray:
    b = bits.astype(float)
    return np.einsum("ci,ij,cj->c", b, theta_upper, b, optimize=True) + b @ lin


def amplitude(state: EvolvedState, s) -> complex:
    """psi(s) = 2^{-n/2} exp[i (sum_{a<b} theta_ab s_a s_b + w . s)]."""
    s = np.asarray(s, dtype=np.int64)
    if s.shape != (state.n,) or np.any((s != 0) & (s != 1)):
        raise ValueError(f"bitstring must be {state.n} entries of 0/1")
    i, j, a = state.core.edges()
    phase = float(np.sum(a * s[i] * s[j])) + float(state.w @ s)
    return complex(math.exp(-0.5 * state.n * math.log(2.0)) * np.exp(1j * phase))


def statevector(state: EvolvedState) -> np.ndarray:
    """All 2^n amplitudes (n <= 24)."""
    n = state.n
    if n > MAX_STATEVECTOR_QUBITS:
        raise ValueError(f"statevector needs n <= {MAX_STATEVECTOR_QUBITS}, got {n}")
    upper = np.triu(state.theta, 1)
    w = state.w
    out = np.empty(1 << n, dtype=complex)
    norm = 2.0 ** (-n / 2)
    for start in range(0, 1 << n, _CHUNK):
        stop = min(1 << n, start + _CHUNK)
        out[start:stop] = norm * np.exp(1j * _phase_of(upper, w, bit_table(n, start, stop)))
    return out


def z_marginals(state: EvolvedState) -> np.ndarray:
    """Probability of outcome 1 in a Z measurement of each spin (brute force)."""
    p = np.abs(statevector(state)) ** 2
    n = state.n
    return np.array([p.reshape((1 << k, 2, -1))[:, 1, :].sum() for k in range(n)])


def _cut_block(state: EvolvedState, a_idx: np.ndarray, b_idx: np.ndarray) -> np.ndarray:
    phi = state.theta[np.ix_(a_idx, b_idx)]
    phi = np.mod(phi, 2 * np.pi)
    phi[(phi < _ZERO_ATOL) | (2 * np.pi - phi < _ZERO_ATOL)] = 0.0
    return phi


def purity(state: EvolvedState, subset) -> float:
    """Tr rho_A^2 from the cross-cut angle block phi.

    Tr rho_A^2 = (D_A / D^2) sum_{r, r'} prod_{i in A} [1 + cos(sum_j phi_ij (r_j - r'_j))].
    The double sum depends only on d = r - r' in {-1, 0, 1}^k (a zero entry
    arises in two ways), and spins with no bond across the cut factor out.
    Disconnected blocks of phi contribute independent factors, and in each
    block the enumerated side is the smaller one.
    """
    n = state.n
    inside = np.zeros(n, dtype=bool)
    a = np.asarray(sorted({int(i) for i in subset}), dtype=np.int64)
    if a.size and (a[0] < 0 or a[-1] >= n):
        raise IndexError("subset index out of range")
    inside[a] = True
    b = np.flatnonzero(~inside)
    if a.size == 0 or b.size == 0:
        return 1.0
    phi = _cut_block(state, a, b)
    phi = phi[np.any(phi != 0, axis=1)]
    phi = phi[:, np.any(phi != 0, axis=0)]
    if phi.size == 0:
        return 1.0
    # disconnected blocks of the cut factorize the sum
    p = 1.0
    for rows, cols in _cut_blocks(phi):
        p *= _block_purity(phi[np.ix_(rows, cols)])
    return p


def _cut_blocks(phi: np.ndarray):
    """Connected blocks of the bipartite graph with adjacency ``phi != 0``."""
    nr, nc = phi.shape
    parent = list(range(nr + nc))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i, j in zip(*np.nonzero(phi)):
        ri, rj = find(int(i)), find(nr + int(j))
        if ri != rj:
            parent[ri] = rj
    groups: dict[int, tuple[list, list]] = {}
    for v in range(nr + nc):
        r, c = groups.setdefault(find(v), ([], []))
        (r if v < nr else c).append(v if v < nr else v - nr)
    return [(np.array(r), np.array(c)) for r, c in groups.values()]


def _block_purity(phi: np.ndarray) -> float:
    if phi.shape[1] > phi.shape[0]:
        phi = phi.T
    rows, k = phi.shape
    if k > MAX_PURITY_SIDE:
        raise ValueError(f"purity needs the smaller side of each entangled block <= {MAX_PURITY_SIDE} spins, got {k}")
    total = 0.0
    digits = np.array([-1.0, 0.0, 1.0])
    count = 3 ** k
    powers = 3 ** np.arange(k - 1, -1, -1, dtype=np.int64)
    for start in range(0, count, _CHUNK):
        idx = np.arange(start, min(count, start + _CHUNK), dtype=np.int64)
        d = digits[(idx[:, None] // powers) % 3]
        weight = np.exp2(np.sum(d == 0, axis=1))
        ang = d @ phi.T
        total += float(np.sum(weight * np.prod(1.0 + np.cos(ang), axis=1)))
    return total / (2.0 ** rows * 4.0 ** k)


@dataclass(frozen=True)
class SymmetrizedState:
    """State after U = sum_s exp(-i s . z)|s><s| with z_m = w_m + (1/2) sum_n theta_mn."""

    state: EvolvedState
    z: np.ndarray

    @property
    def n(self) -> int:
        return self.state.n

    def statevector(self) -> np.ndarray:
        psi = statevector(self.state)
        phase = bit_table(self.n).astype(float) @ self.z
        return psi * np.exp(-1j * phase)


def ising_symmetrize(state: EvolvedState) -> SymmetrizedState:
    z = state.w + 0.5 * state.theta.sum(axis=1)
    return SymmetrizedState(state, z)


def parity_expectation(sym: SymmetrizedState) -> float:
    """<Phi| prod_m X_m |Phi> by brute force; X on every spin reverses the index."""
    phi = sym.statevector()
    return float(np.real(np.vdot(phi, phi[::-1])))


def _component_overlap(theta: np.ndarray) -> complex:
    """2^{-k} sum_s exp[i (sum_{a<b} theta_ab s_a s_b - (1/2) sum_a s_a sum_b theta_ab)]."""
    k = theta.shape[0]
    upper = np.triu(theta, 1)
    lin = -0.5 * theta.sum(axis=1)
    acc = 0.0 + 0.0j
    for start in range(0, 1 << k, _CHUNK):
        stop = min(1 << k, start + _CHUNK)
        acc += np.exp(1j * _phase_of(upper, lin, bit_table(k, start, stop))).sum()
    return acc / (1 << k)


def return_probability_bruteforce(sym: SymmetrizedState) -> float:
    """|<+...+|Phi>|^2, evaluated per connected component and multiplied."""
    theta = sym.state.theta
    p = 1.0
    for comp in connected_components(sym.state):
        if len(comp) < 2:
            continue
        if len(comp) > MAX_COMPONENT:
            raise ValueError(f"component of {len(comp)} spins exceeds the brute-force cap {MAX_COMPONENT}")
        idx = np.array(sorted(comp))
        p *= abs(_component_overlap(theta[np.ix_(idx, idx)])) ** 2
    return float(p)


def has_cycle(graph, nodes=None) -> bool:
    """True iff the graph (an EvolvedState or an edge list), restricted to
    ``nodes`` if given, contains a cycle.  Found by union-find traversal:
    an edge joining two vertices already connected closes a loop."""
    if isinstance(graph, EvolvedState) or isinstance(graph, SymmetrizedState):
        st = graph.state if isinstance(graph, SymmetrizedState) else graph
        i, j, _ = st.core.edges()
        edges = list(zip(i.tolist(), j.tolist()))
    else:
        edges = [(int(u), int(v)) for u, v, *_ in graph]
    if nodes is not None:
        keep = {int(v) for v in nodes}
        edges = [(u, v) for u, v in edges if u in keep and v in keep]
    parent: dict[int, int] = {}

    def find(v):
        parent.setdefault(v, v)
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    seen = set()
    for u, v in edges:
        key = (min(u, v), max(u, v))
        if u == v or key in seen:
            return True
        seen.add(key)
        ru, rv = find(u), find(v)
        if ru == rv:
            return True
        parent[ru] = rv
    return False


def tree_formula(angles) -> float:
    """prod cos^2(theta/4) over the given bond angles, no tree check."""
    a = np.asarray(angles, dtype=float)
    return float(np.prod(np.cos(a / 4.0) ** 2))


def return_probability_tree(sym: SymmetrizedState) -> float:
    """prod over present bonds of cos^2(theta/4); every component must be a tree."""
    if has_cycle(sym.state):
        raise ValueError("support graph has a cycle; use return_probability_bruteforce")
    _, _, a = sym.state.core.edges()
    return tree_formula(a)


def component_return_probabilities(state: EvolvedState, max_size: int = MAX_COMPONENT):
    """Per non-trivial component: (size, has_cycle, brute-force P, tree-formula P).

    Components above ``max_size`` get nan for the brute-force value.
    """
    theta = state.theta
    out = []
    for comp in connected_components(state):
        if len(comp) < 2:
            continue
        idx = np.array(sorted(comp))
        sub = theta[np.ix_(idx, idx)]
        iu = np.triu_indices(idx.size, 1)
        angles = sub[iu][sub[iu] != 0]
        loop = angles.size >= idx.size
        brute = abs(_component_overlap(sub)) ** 2 if idx.size <= max_size else math.nan
        out.append((int(idx.size), bool(loop), float(brute), tree_formula(angles)))
    return out


def random_tree_edges(n: int, rng: np.random.Generator):
    """Uniform random labelled tree on n nodes via a Pruefer sequence."""
    if n < 2:
        return []
    if n == 2:
        return [(0, 1)]
    seq = rng.integers(0, n, size=n - 2).tolist()
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    edges = []
    for v in seq:
        leaf = next(u for u in range(n) if degree[u] == 1)
        edges.append((min(leaf, v), max(leaf, v)))
        degree[leaf] -= 1
        degree[v] -= 1
    u, v = [x for x in range(n) if degree[x] == 1]
    edges.append((u, v))
    return edges


__all__ = [
    "SymmetrizedState",
    "amplitude",
    "bit_table",
    "has_cycle",
    "ising_symmetrize",
    "parity_expectation",
    "purity",
    "component_return_probabilities",
    "random_tree_edges",
    "return_probability_bruteforce",
    "return_probability_tree",
    "statevector",
    "tree_formula",
    "z_marginals",
]
