"""Full state-vector reference simulator (n <= 14), used as a test oracle.

Basis ordering is big-endian (qubit 0 most significant), matching ``iqp``.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 14
MAX_RDM_QUBITS = 10
_EIG_CUT = 1e-12

_SQ2 = 1.0 / math.sqrt(2.0)
GATES = {
    "h": np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    "s": np.diag([1, 1j]).astype(complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.diag([1, -1]).astype(complex),
}
# eigenbases for projective measurement: column b is the (-1)^b eigenvector
_BASES = {
    "Z": np.eye(2, dtype=complex),
    "X": np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    "Y": np.array([[1, 1], [1j, -1j]], dtype=complex) * _SQ2,
}


def rotation(axis: str, angle: float) -> np.ndarray:
    """exp(-i angle/2 sigma_axis)."""
    p = GATES[axis.lower()]
    return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * p


class DenseState:
    """Normalised amplitude vector on n <= 14 qubits, initialised to |+>^n."""

    def __init__(self, n: int, amplitudes=None):
        if n < 1 or n > MAX_QUBITS:
            raise ValueError(f"dense oracle supports 1 <= n <= {MAX_QUBITS}, got {n}")
        self.n = int(n)
        if amplitudes is None:
            self.psi = np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)
        else:
            psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
            if psi.size != 1 << n:
                raise ValueError("amplitude vector has the wrong length")
            self.psi = psi / np.linalg.norm(psi)
        self.outcomes: list[int] = []

    @classmethod
    def zeros(cls, n: int) -> "DenseState":
        psi = np.zeros(1 << n, dtype=complex)
        psi[0] = 1.0
        return cls(n, psi)

    def copy(self) -> "DenseState":
        other = DenseState(self.n, self.psi.copy())
        other.outcomes = list(self.outcomes)
        return other

    def _tensor(self) -> np.ndarray:
        return self.psi.reshape((2,) * self.n)

    def _bits(self, k: int) -> np.ndarray:
        idx = np.arange(1 << self.n)
        return (idx >> (self.n - 1 - k)) & 1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.psi))

    def apply_1q(self, k: int, u) -> "DenseState":
        t = np.moveaxis(self._tensor(), k, 0)
        t = np.tensordot(np.asarray(u, dtype=complex), t, axes=(1, 0))
        self.psi = np.moveaxis(t, 0, k).reshape(-1)
        return self

    def cphase(self, i: int, j: int, angle: float) -> "DenseState":
        """exp(i angle s_i s_j)."""
        if i == j:
            raise ValueError("two-qubit gate needs distinct qubits")
        both = self._bits(i) & self._bits(j)
        self.psi = self.psi * np.exp(1j * angle * both)
        return self

    def cz(self, i: int, j: int) -> "DenseState":
        return self.cphase(i, j, math.pi)

    def zphase(self, k: int, angle: float) -> "DenseState":
        """exp(i angle s_k)."""
        self.psi = self.psi * np.exp(1j * angle * self._bits(k))
        return self

    def probability(self, k: int, basis: str = "Z") -> np.ndarray:
        """Probabilities of the two outcomes of a single-qubit measurement."""
        v = _BASES[basis.upper()]
        t = np.tensordot(v.conj().T, np.moveaxis(self._tensor(), k, 0), axes=(1, 0))
        return np.array([np.vdot(t[0], t[0]).real, np.vdot(t[1], t[1]).real])

    def measure(self, k: int, basis: str = "Z", outcome: int | None = None, rng=None) -> int:
        """Projective measurement; returns the outcome bit (eigenvalue (-1)^bit)."""
        probs = self.probability(k, basis)
        if outcome is None:
            if rng is None:
                raise ValueError("a random source is required unless outcome is given")
            outcome = int(rng.random() >= probs[0])
        outcome = int(outcome)
        if probs[outcome] < 1e-14:
            raise ValueError(f"outcome {outcome} has zero probability")
        v = _BASES[basis.upper()][:, outcome]
        proj = np.outer(v, v.conj())
        self.apply_1q(k, proj)
        self.psi /= math.sqrt(probs[outcome])
        self.outcomes.append(outcome)
        return outcome

    def reset_plus(self, k: int) -> "DenseState":
        """Replace qubit k (assumed disentangled) by |+>; the rest is kept."""
        t = np.moveaxis(self._tensor(), k, 0)
        rest = t[0] if np.vdot(t[0], t[0]).real >= np.vdot(t[1], t[1]).real else t[1]
        nrm = np.linalg.norm(rest)
        rest = rest / nrm
        new = np.stack([rest, rest]) * _SQ2
        self.psi = np.moveaxis(new, 0, k).reshape(-1)
        return self

    def measure_reset(self, k: int, outcome: int | None = None, rng=None) -> int:
        s = self.measure(k, "Z", outcome, rng)
        self.reset_plus(k)
        return s


def simulate_dense(n: int, ops: Iterable[Sequence], rng=None, *, initial: str = "plus") -> DenseState:
    """Apply an op sequence to |+>^n (or |0>^n with initial='zero').

    Ops are tuples:
      ("cphase", i, j, angle)  ("cz", i, j)  ("zphase", k, angle)
      ("h"|"s"|"x"|"y"|"z", k)  ("rx"|"ry"|"rz", k, angle)  ("u", k, matrix)
      ("measure", k, basis[, outcome])  ("measure_reset", k[, outcome])
    """
    st = DenseState.zeros(n) if initial == "zero" else DenseState(n)
    for op in ops:
        name = op[0]
        if name == "cphase":
            st.cphase(op[1], op[2], op[3])
        elif name in ("cz", "gate"):
            st.cphase(op[1], op[2], op[3] if len(op) > 3 else math.pi)
        elif name == "zphase":
            st.zphase(op[1], op[2])
        elif name in GATES:
            st.apply_1q(op[1], GATES[name])
        elif name in ("rx", "ry", "rz"):
            st.apply_1q(op[1], rotation(name[1], op[2]))
        elif name == "u":
            st.apply_1q(op[1], op[2])
        elif name == "measure":
            st.measure(op[1], op[2] if len(op) > 2 else "Z", op[3] if len(op) > 3 else None, rng)
        elif name == "measure_reset":
            st.measure_reset(op[1], op[2] if len(op) > 2 else None, rng)
        else:
            raise ValueError(f"unknown op {name!r}")
    return st


def replay(state) -> DenseState:
    """Dense replay of an EvolvedState's op log (needs ``log=True``)."""
    if state.history is None:
        raise ValueError("state was created without an op log")
    return simulate_dense(state.n, state.history)


def reduced_density_matrix(dense: DenseState, subset: Iterable[int]) -> np.ndarray:
    a = sorted({int(i) for i in subset})
    if len(a) > MAX_RDM_QUBITS:
        raise ValueError(f"reduced density matrix limited to {MAX_RDM_QUBITS} qubits")
    rest = [i for i in range(dense.n) if i not in a]
    t = np.transpose(dense._tensor(), a + rest).reshape(1 << len(a), -1)
    return t @ t.conj().T


def _smaller_side(dense: DenseState, subset) -> list[int]:
    a = sorted({int(i) for i in subset})
    rest = [i for i in range(dense.n) if i not in a]
    return a if len(a) <= len(rest) else rest


def von_neumann_entropy_dense(dense: DenseState, subset: Iterable[int]) -> float:
    """Entropy in bits; the smaller side is diagonalised (pure state)."""
    side = _smaller_side(dense, subset)
    if not side:
        return 0.0
    lam = np.linalg.eigvalsh(reduced_density_matrix(dense, side))
    lam = lam[lam > _EIG_CUT]
    return float(-np.sum(lam * np.log2(lam)))


def purity_dense(dense: DenseState, subset: Iterable[int]) -> float:
    side = _smaller_side(dense, subset)
    if not side:
        return 1.0
    rho = reduced_density_matrix(dense, side)
    return float(np.real(np.trace(rho @ rho)))


def phase_aligned(a: np.ndarray, b: np.ndarray) -> float:
    """max |a - e^{i phi} b| with the global phase phi fitted."""
    ov = np.vdot(b, a)
    ph = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.max(np.abs(a - ph * b)))
