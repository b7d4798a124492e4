"""Phase-matrix representation of states evolved by commuting two-qubit gates
and Z measurements followed by a reset to |+>.

The amplitude in the Z basis is

    psi(s) = 2^{-n/2} exp[i (sum_{a<b} theta_ab s_a s_b + w . s)],

so the state is fully described by the symmetric angle matrix ``theta`` (zero
diagonal) and the linear phases ``w``.  Only the support graph of ``theta``
matters for separability; in clifford mode it is the usual graph state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ._backend import get_backend

MODES = {"clifford": 0, "iqp": 1, "idealized-graph": 2}
_ANGLE_ATOL = 1e-9


class EvolvedState:
    """Mutable n-qubit state in one of three modes.

    ``clifford``: CZ gates only, bonds toggle (CZ^2 = 1).
    ``iqp``: arbitrary ZZ-phase angles, accumulated modulo 2pi.
    ``idealized-graph``: a gate always leaves its bond present (the
    thermodynamic-limit reading of the bond rule); angles are stored as pi.
    """

    def __init__(self, n: int, mode: str = "clifford", *, backend=None, log: bool = False):
        if int(n) != n or n < 1:
            raise ValueError(f"qubit count must be a positive integer, got {n!r}")
        if mode not in MODES:
            raise ValueError(f"mode must be one of {sorted(MODES)}, got {mode!r}")
        self.n = int(n)
        self.mode = mode
        self.backend = get_backend(backend)
        self.core = self.backend.GraphCore(self.n, MODES[mode])
        self.history: list | None = [] if log else None

    def copy(self) -> "EvolvedState":
        other = EvolvedState.__new__(EvolvedState)
        other.n = self.n
        other.mode = self.mode
        other.backend = self.backend
        other.core = self.core.copy()
        other.history = None if self.history is None else list(self.history)
        return other

    @property
    def theta(self) -> np.ndarray:
        """Dense symmetric angle matrix, zero diagonal."""
        t = np.zeros((self.n, self.n))
        i, j, a = self.core.edges()
        t[i, j] = a
        t[j, i] = a
        return t

    @property
    def w(self) -> np.ndarray:
        return self.core.get_w()

    def set_w(self, k: int, value: float) -> None:
        self._check_index(k)
        if self.mode == "clifford" and not (_is_zero_angle(value) or _is_pi(value)):
            raise ValueError("clifford-mode linear phases must be 0 or pi")
        self.core.set_w(k, value)

    @property
    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=np.uint8)
        i, j, _ = self.core.edges()
        adj[i, j] = 1
        adj[j, i] = 1
        return adj

    def edges(self):
        """(i, j, angle) triples with i < j."""
        i, j, a = self.core.edges()
        return list(zip(i.tolist(), j.tolist(), a.tolist()))

    def neighbors(self, k: int) -> list[int]:
        return self.core.neighbors(k)

    def degrees(self) -> np.ndarray:
        return self.core.degrees()

    def _check_index(self, k) -> None:
        if not 0 <= k < self.n:
            raise IndexError(f"qubit {k} out of range for n={self.n}")

    def __repr__(self) -> str:
        return f"EvolvedState(n={self.n}, mode={self.mode!r}, edges={len(self.core.edges()[0])})"


@dataclass(frozen=True)
class Bipartition:
    """Subsystem A of an n-qubit register; the complement is implied."""

    n: int
    subset_a: frozenset

    def __init__(self, n: int, subset_a: Iterable[int]):
        items = list(subset_a)
        a = frozenset(int(i) for i in items)
        if len(a) != len(items):
            raise ValueError("bipartition indices must be unique")
        if any(not 0 <= i < n for i in a):
            raise ValueError(f"bipartition indices must lie in [0, {n})")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "subset_a", a)

    @property
    def a(self) -> np.ndarray:
        return np.array(sorted(self.subset_a), dtype=np.int64)

    @property
    def complement(self) -> np.ndarray:
        return np.array([i for i in range(self.n) if i not in self.subset_a], dtype=np.int64)


def _is_zero_angle(a: float) -> bool:
    r = math.fmod(a, 2 * math.pi)
    if r < 0:
        r += 2 * math.pi
    return r < _ANGLE_ATOL or 2 * math.pi - r < _ANGLE_ATOL


def _is_pi(a: float) -> bool:
    return _is_zero_angle(a - math.pi)


def _as_bipartition(state: EvolvedState, part) -> Bipartition:
    if isinstance(part, Bipartition):
        if part.n != state.n:
            raise ValueError("bipartition size does not match the state")
        return part
    return Bipartition(state.n, part)


def draw_bit(rng) -> int:
    """Fair coin from either a kernel Rng or a numpy Generator."""
    if hasattr(rng, "bit"):
        return int(rng.bit())
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(2))
    raise TypeError(f"unsupported random source {type(rng).__name__}")


def new_product_state(n: int, mode: str = "clifford", *, backend=None, log: bool = False) -> EvolvedState:
    """|+>^n: theta = 0, w = 0."""
    return EvolvedState(n, mode, backend=backend, log=log)


def apply_two_qubit_gate(state: EvolvedState, i: int, j: int, angle: float = math.pi) -> EvolvedState:
    """Apply exp(i angle s_i s_j); theta_ij += angle (mod 2pi)."""
    state._check_index(i)
    state._check_index(j)
    if i == j:
        raise ValueError("two-qubit gate needs distinct qubits")
    if state.mode == "clifford" and not _is_pi(angle):
        raise ValueError(f"clifford mode only admits CZ (angle pi), got {angle!r}")
    state.core.gate(int(i), int(j), float(angle))
    if state.history is not None:
        state.history.append(("gate", int(i), int(j), float(angle)))
    return state


def measure_z_and_reset(state: EvolvedState, k: int, rng=None, *, outcome: int | None = None):
    """Measure Z on qubit k (outcome s in {0, 1}, always a fair coin), then
    rotate k back to |+>.  Returns ``(s, state)``.

    Neighbours pick up w_i += s * theta_ki and every bond at k is removed.
    """
    state._check_index(k)
    if outcome is None:
        if rng is None:
            raise ValueError("a random source is required unless outcome is given")
        s = draw_bit(rng)
    else:
        s = int(outcome)
        if s not in (0, 1):
            raise ValueError("outcome must be 0 or 1")
    state.core.measure_reset(int(k), s)
    if state.history is not None:
        state.history.append(("measure_reset", int(k), s))
    return s, state


def gf2_rank(matrix) -> int:
    """Rank of a bit matrix over the two-element field."""
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise ValueError("gf2_rank expects a 2-D array")
    if m.size == 0:
        return 0
    return int(get_backend().gf2_rank(m.astype(np.uint8) & 1))


def bipartite_entropy_clifford(state: EvolvedState, bipartition) -> int:
    """Entanglement entropy in bits: GF(2) rank of the A x complement block of
    the adjacency matrix."""
    if state.mode != "clifford":
        raise ValueError("GF(2)-rank entropy only holds in clifford mode; use iqp.purity instead")
    part = _as_bipartition(state, bipartition)
    a, b = part.a, part.complement
    if a.size == 0 or b.size == 0:
        return 0
    block = state.adjacency[np.ix_(a, b)]
    return gf2_rank(block)


def is_separable(state: EvolvedState, bipartition) -> bool:
    """True iff no present bond crosses the cut."""
    part = _as_bipartition(state, bipartition)
    inside = np.zeros(state.n, dtype=bool)
    inside[part.a] = True
    i, j, _ = state.core.edges()
    return not np.any(inside[i] != inside[j])


def connected_components(state: EvolvedState) -> list[set[int]]:
    """Components of the support graph, ordered by smallest member."""
    labels = state.core.component_labels()
    groups: dict[int, set[int]] = {}
    for node, lab in enumerate(labels.tolist()):
        groups.setdefault(lab, set()).add(node)
    return sorted(groups.values(), key=min)
