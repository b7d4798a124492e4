"""Stabilizer tableaux: graph-state conversion, Pauli measurements,
entanglement entropies and the entangling-power protocol."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._backend import get_backend
from .graph_state import EvolvedState, gf2_rank

AXES = {"X": 0, "Y": 1, "Z": 2}
_LETTERS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


class _GeneratorBits:
    """Adapter giving a numpy Generator the ``bit()`` method the kernels use."""

    def __init__(self, gen: np.random.Generator):
        self.gen = gen

    def bit(self) -> int:
        return int(self.gen.integers(2))

    def below(self, n: int) -> int:
        return int(self.gen.integers(n))


def _as_source(rng):
    if rng is None:
        return None
    if isinstance(rng, np.random.Generator):
        return _GeneratorBits(rng)
    if hasattr(rng, "bit"):
        return rng
    raise TypeError(f"unsupported random source {type(rng).__name__}")


def parse_pauli(text: str, n: int | None = None):
    """'+XZI' / '-YX' / 'ZZ' -> (x bits, z bits, sign bit); qubit 0 leftmost."""
    s = text.strip()
    sign = 0
    if s[:1] in "+-":
        sign = int(s[0] == "-")
        s = s[1:]
    if n is not None and len(s) != n:
        raise ValueError(f"Pauli string {text!r} has length {len(s)}, expected {n}")
    x = np.zeros(len(s), dtype=bool)
    z = np.zeros(len(s), dtype=bool)
    for i, c in enumerate(s.upper()):
        if c not in "IXYZ":
            raise ValueError(f"bad Pauli letter {c!r} in {text!r}")
        x[i] = c in "XY"
        z[i] = c in "YZ"
    return x, z, sign


def format_pauli(x, z, sign) -> str:
    body = "".join(_LETTERS[(int(a), int(b))] for a, b in zip(x, z))
    return ("-" if sign else "+") + body


def _symp(ax, az, bx, bz) -> np.ndarray:
    """Symplectic products of row sets (broadcasting), as 0/1 ints."""
    return ((ax.astype(np.int64) @ bz.T.astype(np.int64)) + (az.astype(np.int64) @ bx.T.astype(np.int64))) & 1


def _gf2_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """One solution X of A X = B over GF(2); A is (m, k), B is (m, r)."""
    a = a.astype(np.uint8) & 1
    b = b.astype(np.uint8) & 1
    m, k = a.shape
    aug = np.concatenate([a, b], axis=1)
    pivots = []
    row = 0
    for col in range(k):
        hit = np.flatnonzero(aug[row:, col])
        if hit.size == 0:
            continue
        p = row + hit[0]
        if p != row:
            aug[[row, p]] = aug[[p, row]]
        mask = aug[:, col].astype(bool)
        mask[row] = False
        aug[mask] ^= aug[row]
        pivots.append(col)
        row += 1
        if row == m:
            break
    if np.any(aug[row:, k:]):
        raise ValueError("linear system over GF(2) has no solution")
    sol = np.zeros((k, b.shape[1]), dtype=np.uint8)
    for i, col in enumerate(pivots):
        sol[col] = aug[i, k:]
    return sol


class StabilizerTableau:
    """n-qubit stabilizer state with destabilizers, starting from |0...0>."""

    def __init__(self, n: int, *, backend=None):
        if int(n) != n or n < 1:
            raise ValueError("qubit count must be a positive integer")
        self.n = int(n)
        self.backend = get_backend(backend)
        self.core = self.backend.TableauCore(self.n)

    @classmethod
    def from_arrays(cls, x, z, r, *, backend=None) -> "StabilizerTableau":
        x = np.asarray(x)
        t = cls(x.shape[1], backend=backend)
        t.core.load(np.asarray(x, dtype=np.uint8), np.asarray(z, dtype=np.uint8), np.asarray(r, dtype=np.uint8))
        return t

    @classmethod
    def from_stabilizers(cls, paulis: Sequence[str], *, backend=None) -> "StabilizerTableau":
        """Tableau for the state stabilized by ``paulis`` (independent and
        mutually commuting); destabilizers are completed by GF(2) solving."""
        n = len(paulis)
        rows = [parse_pauli(p, n) for p in paulis]
        sx = np.array([r[0] for r in rows], dtype=np.uint8)
        sz = np.array([r[1] for r in rows], dtype=np.uint8)
        sr = np.array([r[2] for r in rows], dtype=np.uint8)
        if np.any(_symp(sx, sz, sx, sz)):
            raise ValueError("stabilizers must commute")
        if gf2_rank(np.concatenate([sx, sz], axis=1)) != n:
            raise ValueError("stabilizers must be independent")
        # destabilizer d_i: symplectic product with s_j is delta_ij
        omega = np.concatenate([sz, sx], axis=1)
        d = _gf2_solve(omega, np.eye(n, dtype=np.uint8)).T
        dx, dz = d[:, :n].copy(), d[:, n:].copy()
        for j in range(n):
            for i in range(j):
                if _symp(dx[i:i + 1], dz[i:i + 1], dx[j:j + 1], dz[j:j + 1])[0, 0]:
                    dx[j] ^= sx[i]
                    dz[j] ^= sz[i]
        x = np.concatenate([dx, sx])
        z = np.concatenate([dz, sz])
        r = np.concatenate([np.zeros(n, dtype=np.uint8), sr])
        return cls.from_arrays(x, z, r, backend=backend)

    def copy(self) -> "StabilizerTableau":
        other = StabilizerTableau.__new__(StabilizerTableau)
        other.n = self.n
        other.backend = self.backend
        other.core = self.core.copy()
        return other

    def arrays(self):
        """(x, z, r) as uint8 arrays; rows 0..n-1 destabilizers, n..2n-1 stabilizers."""
        return self.core.arrays()

    def stabilizers(self) -> list[str]:
        x, z, r = self.arrays()
        n = self.n
        return [format_pauli(x[i], z[i], r[i]) for i in range(n, 2 * n)]

    def destabilizers(self) -> list[str]:
        x, z, r = self.arrays()
        return [format_pauli(x[i], z[i], r[i]) for i in range(self.n)]

    def h(self, q: int):
        self._check(q)
        self.core.h(int(q))
        return self

    def s(self, q: int):
        self._check(q)
        self.core.s(int(q))
        return self

    def cz(self, a: int, b: int):
        self._check(a)
        self._check(b)
        if a == b:
            raise ValueError("CZ needs distinct qubits")
        self.core.cz(int(a), int(b))
        return self

    def is_valid(self) -> bool:
        """Commutation structure of a stabilizer/destabilizer pair and full rank."""
        x, z, _ = self.arrays()
        n = self.n
        form = _symp(x, z, x, z)
        want = np.zeros((2 * n, 2 * n), dtype=np.int64)
        want[np.arange(n), n + np.arange(n)] = 1
        want[n + np.arange(n), np.arange(n)] = 1
        if not np.array_equal(form, want):
            return False
        return gf2_rank(np.concatenate([x[n:], z[n:]], axis=1)) == n

    def _check(self, q):
        if not 0 <= q < self.n:
            raise IndexError(f"qubit {q} out of range for n={self.n}")

    def __repr__(self) -> str:
        return f"StabilizerTableau({self.stabilizers()})"


def _axis_index(axis) -> int:
    if isinstance(axis, str):
        try:
            return AXES[axis.upper()]
        except KeyError:
            raise ValueError(f"axis must be X, Y or Z, got {axis!r}") from None
    if axis in (0, 1, 2):
        return int(axis)
    raise ValueError(f"axis must be X, Y or Z, got {axis!r}")


def measure_pauli(tableau: StabilizerTableau, qubit: int, axis, rng=None, *,
                  return_deterministic: bool = False):
    """Measure X, Y or Z on one qubit; returns the eigenvalue +1 or -1.

    Deterministic outcomes leave the state alone and never touch ``rng``.
    """
    tableau._check(qubit)
    ax = _axis_index(axis)
    src = _as_source(rng)
    if src is None:
        # only legal if the outcome turns out to be deterministic
        probe = tableau.core.copy()
        bit, det = probe.measure(int(qubit), ax, None, 0)
        if not det:
            raise ValueError("random outcome needs a random source")
        tableau.core = probe
    else:
        bit, det = tableau.core.measure(int(qubit), ax, src)
    value = 1 - 2 * int(bit)
    return (value, bool(det)) if return_deterministic else value


def from_graph_state(state: EvolvedState, nodes: Sequence[int] | None = None, *,
                     backend=None) -> StabilizerTableau:
    """Graph state -> tableau with stabilizer i = (-1)^{w_i/pi} X_i prod_j Z_j^{G_ij}.

    ``nodes`` restricts to a union of whole components (relabelled 0..k-1 in
    the given order), which is exact because the state factorizes over them.
    """
    if state.mode == "iqp":
        raise ValueError("only clifford (graph) states have a stabilizer tableau")
    adj = state.adjacency
    w = state.w
    if nodes is None:
        nodes = np.arange(state.n)
    nodes = np.asarray(nodes, dtype=np.int64)
    sub = adj[np.ix_(nodes, nodes)]
    if nodes.size != state.n:
        outside = np.ones(state.n, dtype=bool)
        outside[nodes] = False
        if np.any(adj[np.ix_(nodes, np.flatnonzero(outside))]):
            raise ValueError("node subset must be a union of connected components")
    k = nodes.size
    eye = np.eye(k, dtype=np.uint8)
    x = np.concatenate([np.zeros((k, k), dtype=np.uint8), eye])
    z = np.concatenate([eye, sub.astype(np.uint8)])
    signs = np.rint(np.mod(w[nodes], 2 * np.pi) / np.pi).astype(np.int64) % 2
    r = np.concatenate([np.zeros(k, dtype=np.uint8), signs.astype(np.uint8)])
    return StabilizerTableau.from_arrays(x, z, r, backend=backend or state.backend)


def _cols(tableau: StabilizerTableau, subset) -> np.ndarray:
    cols = np.asarray(sorted({int(i) for i in subset}), dtype=np.int64)
    if cols.size and (cols[0] < 0 or cols[-1] >= tableau.n):
        raise IndexError("subset index out of range")
    return cols


def subsystem_entropy(tableau: StabilizerTableau, subset: Iterable[int]) -> int:
    """Entanglement entropy of A in bits: rank of the stabilizers restricted
    to A (X and Z columns) minus |A|."""
    cols = _cols(tableau, subset)
    if cols.size == 0 or cols.size == tableau.n:
        return 0
    return int(tableau.core.subsystem_rank(cols)) - int(cols.size)


def mutual_information(tableau: StabilizerTableau, a: Iterable[int], b: Iterable[int]) -> int:
    sa, sb = set(int(i) for i in a), set(int(i) for i in b)
    if sa & sb:
        raise ValueError("subsystems must be disjoint")
    return subsystem_entropy(tableau, sa) + subsystem_entropy(tableau, sb) - subsystem_entropy(tableau, sa | sb)


def five_qubit_code_state(*, backend=None) -> StabilizerTableau:
    """Logical |0> of the perfect five-qubit code."""
    gens = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ", "ZZZZZ"]
    return StabilizerTableau.from_stabilizers(gens, backend=backend)


@dataclass(frozen=True)
class EntanglingPowerResult:
    i_before: int
    i_after: int

    @property
    def delta(self) -> int:
        return self.i_after - self.i_before


class _PlusOutcomes:
    """Source that post-selects every random outcome to +1."""

    def bit(self) -> int:
        return 0


def _draw_axis(src) -> int:
    return int(src.below(3))


def measure_rest(tableau: StabilizerTableau, keep: Iterable[int], basis="X", rng=None) -> None:
    """Measure every qubit outside ``keep`` in ascending order.

    Without ``rng`` random outcomes are post-selected to +1; stabilizer
    entropies do not depend on the outcomes.
    """
    keep = {int(i) for i in keep}
    src = _as_source(rng)
    random_basis = isinstance(basis, str) and basis.lower() == "random"
    if src is None:
        if random_basis:
            raise ValueError("a random basis needs a random source")
        src = _PlusOutcomes()
    fixed = None if random_basis else _axis_index(basis)
    for q in range(tableau.n):
        if q in keep:
            continue
        ax = _draw_axis(src) if random_basis else fixed
        measure_pauli(tableau, q, ax, src)


def entangling_power(tableau: StabilizerTableau, a: int, b: int, basis="X", rng=None) -> EntanglingPowerResult:
    """Mutual information of qubits a, b before and after measuring all others."""
    if a == b:
        raise ValueError("a and b must differ")
    before = mutual_information(tableau, [a], [b])
    t = tableau.copy()
    measure_rest(t, (a, b), basis, rng)
    return EntanglingPowerResult(before, mutual_information(t, [a], [b]))


def entangling_power_experiment(state: EvolvedState, a: int, b: int, basis="X",
                                rng=None) -> EntanglingPowerResult:
    """Entangling power of spins a, b in a graph state.

    Only the component holding a and b matters: measurements elsewhere act
    on a tensor factor.  Spins in different components give zero.
    """
    if state.mode == "iqp":
        raise ValueError("entangling power needs a stabilizer (clifford) state")
    state._check_index(a)
    state._check_index(b)
    if a == b:
        raise ValueError("a and b must differ")
    labels = state.core.component_labels()
    if labels[a] != labels[b]:
        return EntanglingPowerResult(0, 0)
    nodes = np.flatnonzero(labels == labels[a])
    tab = from_graph_state(state, nodes)
    la = int(np.searchsorted(nodes, a))
    lb = int(np.searchsorted(nodes, b))
    return entangling_power(tab, la, lb, basis, rng)
