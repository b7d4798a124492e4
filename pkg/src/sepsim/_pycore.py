"""Pure-Python implementation of the hot kernels.

This module mirrors ``sepsim._core`` (Cython) call for call and consumes the
random stream identically, so both backends produce bitwise-equal results for
equal seeds.  It is used when the extension is not built, and as the reference
side of the backend-equivalence tests.
"""

import math

import numpy as np

BACKEND = "python"

MASK64 = (1 << 64) - 1
TWO_PI = 2.0 * math.pi
SNAP = 1e-9

CLIFFORD = 0
IQP = 1
IDEALIZED = 2

# (x, z) bits of the single-qubit Paulis X, Y, Z
AXIS_BITS = ((1, 0), (1, 1), (0, 1))


def reduce_angle(a):
    """Reduce an angle into [0, 2pi), snapping near-multiples of 2pi to 0."""
    a = math.fmod(a, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    if a < SNAP or TWO_PI - a < SNAP:
        return 0.0
    return a


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK64


class Rng:
    """xoshiro256** generator."""

    __slots__ = ("_s",)

    def __init__(self, state):
        s = [int(v) & MASK64 for v in state]
        if len(s) != 4:
            raise ValueError("xoshiro256** needs four 64-bit state words")
        if not any(s):
            raise ValueError("xoshiro256** state must not be all zero")
        self._s = s

    def next_u64(self):
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def below(self, n):
        """Integer in [0, n) for 1 <= n < 2**32."""
        if not 1 <= n < 4294967296:
            raise ValueError("below(n) needs 1 <= n < 2**32")
        return ((self.next_u64() >> 32) * n) >> 32

    def bit(self):
        return self.next_u64() >> 63

    def uniform(self):
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def state(self):
        return tuple(self._s)

    def copy(self):
        return Rng(self._s)


class GraphCore:
    """Support graph with per-edge angles and per-node linear phases.

    Neighbor and angle lists are kept in parallel; removal swaps with the last
    entry, so list order is part of the reproducibility contract.
    """

    def __init__(self, n, mode):
        if n < 1:
            raise ValueError("n must be positive")
        if mode not in (CLIFFORD, IQP, IDEALIZED):
            raise ValueError(f"unknown mode code {mode}")
        self.n = n
        self.mode = mode
        self._nbr = [[] for _ in range(n)]
        self._ang = [[] for _ in range(n)]
        self._w = [0.0] * n

    def copy(self):
        other = GraphCore(self.n, self.mode)
        other._nbr = [list(v) for v in self._nbr]
        other._ang = [list(v) for v in self._ang]
        other._w = list(self._w)
        return other

    def _remove(self, i, v):
        nb = self._nbr[i]
        an = self._ang[i]
        p = nb.index(v)
        nb[p] = nb[-1]
        an[p] = an[-1]
        nb.pop()
        an.pop()

    def _link(self, i, j, a):
        self._nbr[i].append(j)
        self._ang[i].append(a)
        self._nbr[j].append(i)
        self._ang[j].append(a)

    def gate(self, i, j, angle):
        nb = self._nbr[i]
        try:
            p = nb.index(j)
        except ValueError:
            p = -1
        mode = self.mode
        if p >= 0:
            if mode == CLIFFORD:
                self._remove(i, j)
                self._remove(j, i)
            elif mode == IQP:
                a = reduce_angle(self._ang[i][p] + angle)
                if a == 0.0:
                    self._remove(i, j)
                    self._remove(j, i)
                else:
                    self._ang[i][p] = a
                    self._ang[j][self._nbr[j].index(i)] = a
        else:
            a = reduce_angle(angle) if mode == IQP else math.pi
            if a != 0.0:
                self._link(i, j, a)

    def measure_reset(self, k, s):
        nb = self._nbr[k]
        an = self._ang[k]
        w = self._w
        for idx in range(len(nb)):
            i = nb[idx]
            if s:
                w[i] = reduce_angle(w[i] + an[idx])
            self._remove(i, k)
        nb.clear()
        an.clear()
        w[k] = 0.0

    def _random_gate(self, rng, uniform_angles):
        n = self.n
        i = rng.below(n)
        j = rng.below(n - 1)
        if j >= i:
            j += 1
        if uniform_angles:
            u = rng.uniform()
            while u == 0.0:
                u = rng.uniform()
            angle = TWO_PI * u
        else:
            angle = math.pi
        self.gate(i, j, angle)

    def _random_measurement(self, rng):
        k = rng.below(self.n)
        s = rng.bit()
        self.measure_reset(k, s)

    def run(self, steps, gamma_u, gamma_m, interleave, uniform_angles, rng):
        if self.n < 2:
            raise ValueError("dynamics need at least two qubits")
        for _ in range(steps):
            if interleave:
                gl = gamma_u
                ml = gamma_m
                while gl + ml:
                    if rng.below(gl + ml) < gl:
                        self._random_gate(rng, uniform_angles)
                        gl -= 1
                    else:
                        self._random_measurement(rng)
                        ml -= 1
            else:
                for _ in range(gamma_u):
                    self._random_gate(rng, uniform_angles)
                for _ in range(gamma_m):
                    self._random_measurement(rng)

    def neighbors(self, k):
        return list(self._nbr[k])

    def angles(self, k):
        return list(self._ang[k])

    def degrees(self):
        return np.array([len(v) for v in self._nbr], dtype=np.int64)

    def get_w(self):
        return np.array(self._w, dtype=np.float64)

    def set_w(self, k, value):
        self._w[k] = reduce_angle(value)

    def edges(self):
        """Arrays (i, j, angle) over present edges with i < j."""
        ii, jj, aa = [], [], []
        for i in range(self.n):
            for j, a in zip(self._nbr[i], self._ang[i]):
                if j > i:
                    ii.append(i)
                    jj.append(j)
                    aa.append(a)
        return (np.array(ii, dtype=np.int64), np.array(jj, dtype=np.int64),
                np.array(aa, dtype=np.float64))

    def component_labels(self):
        """Union-find root for every node (size-weighted, path halving)."""
        n = self.n
        parent = list(range(n))
        size = [1] * n

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i in range(n):
            for j in self._nbr[i]:
                if j > i:
                    ri = find(i)
                    rj = find(j)
                    if ri != rj:
                        if size[ri] < size[rj]:
                            ri, rj = rj, ri
                        parent[rj] = ri
                        size[ri] += size[rj]
        return np.array([find(i) for i in range(n)], dtype=np.int64)

    def component_sizes(self):
        labels = self.component_labels()
        return np.bincount(labels, minlength=self.n)[np.unique(labels)]


def gf2_rank(mat):
    """Rank over GF(2) of a 2-D array of bits."""
    m = (np.asarray(mat) % 2).astype(np.uint8)
    if m.ndim != 2:
        raise ValueError("gf2_rank expects a 2-D array")
    m = m.copy()
    rows, cols = m.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        piv = np.flatnonzero(m[rank:, c])
        if piv.size == 0:
            continue
        p = rank + piv[0]
        if p != rank:
            m[[rank, p]] = m[[p, rank]]
        hit = m[:, c].astype(bool)
        hit[rank] = False
        m[hit] ^= m[rank]
        rank += 1
    return rank


def _g_sum(x1, z1, x2, z2):
    """Exponent of i from multiplying Pauli rows (x1, z1) * (x2, z2).

    Works on the last axis; inputs are boolean arrays.
    """
    plus = (x1 & z1 & z2 & ~x2) | (x1 & ~z1 & x2 & z2) | (~x1 & z1 & x2 & ~z2)
    minus = (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & ~x2 & z2) | (~x1 & z1 & x2 & z2)
    return plus.sum(axis=-1, dtype=np.int64) - minus.sum(axis=-1, dtype=np.int64)


class TableauCore:
    """Stabilizer/destabilizer tableau (rows 0..n-1 destabilizers, n..2n-1
    stabilizers), initialised to |0...0>.  Signs are bits: 0 -> +, 1 -> -.
    """

    def __init__(self, n):
        if n < 1:
            raise ValueError("n must be positive")
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=bool)
        self.z = np.zeros((2 * n, n), dtype=bool)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        idx = np.arange(n)
        self.x[idx, idx] = True
        self.z[n + idx, idx] = True

    def copy(self):
        other = TableauCore.__new__(TableauCore)
        other.n = self.n
        other.x = self.x.copy()
        other.z = self.z.copy()
        other.r = self.r.copy()
        return other

    def load(self, x, z, r):
        x = np.asarray(x, dtype=bool)
        z = np.asarray(z, dtype=bool)
        r = np.asarray(r, dtype=np.uint8) & 1
        if x.shape != (2 * self.n, self.n) or z.shape != x.shape or r.shape != (2 * self.n,):
            raise ValueError("tableau arrays have the wrong shape")
        self.x = x.copy()
        self.z = z.copy()
        self.r = r.copy()

    def arrays(self):
        return (self.x.astype(np.uint8), self.z.astype(np.uint8), self.r.copy())

    def h(self, q):
        xq = self.x[:, q].copy()
        zq = self.z[:, q].copy()
        self.r ^= (xq & zq).astype(np.uint8)
        self.x[:, q] = zq
        self.z[:, q] = xq

    def s(self, q):
        xq = self.x[:, q]
        self.r ^= (xq & self.z[:, q]).astype(np.uint8)
        self.z[:, q] ^= xq

    def cz(self, a, b):
        xa = self.x[:, a]
        xb = self.x[:, b]
        self.r ^= (xa & xb & (self.z[:, a] ^ self.z[:, b])).astype(np.uint8)
        self.z[:, a] ^= xb
        self.z[:, b] ^= xa

    def _rowsum_many(self, targets, src):
        x, z, r = self.x, self.z, self.r
        g = _g_sum(x[src][None, :], z[src][None, :], x[targets], z[targets])
        total = 2 * r[targets].astype(np.int64) + 2 * int(r[src]) + g
        r[targets] = ((total % 4) >> 1).astype(np.uint8)
        x[targets] ^= x[src]
        z[targets] ^= z[src]

    def measure(self, q, axis, rng, forced=-1):
        """Measure X/Y/Z (axis 0/1/2) on qubit q.

        Returns (outcome bit, deterministic flag).  ``forced`` fixes the bit in
        the random case; ``rng`` is only consulted when the outcome is random.
        """
        n = self.n
        px, pz = AXIS_BITS[axis]
        anti = np.zeros(2 * n, dtype=bool)
        if pz:
            anti ^= self.x[:, q]
        if px:
            anti ^= self.z[:, q]
        stab_hits = np.flatnonzero(anti[n:])
        if stab_hits.size:
            p = n + int(stab_hits[0])
            targets = np.flatnonzero(anti)
            targets = targets[targets != p]
            if targets.size:
                self._rowsum_many(targets, p)
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.r[p - n] = self.r[p]
            self.x[p] = False
            self.z[p] = False
            self.x[p, q] = bool(px)
            self.z[p, q] = bool(pz)
            b = int(forced) if forced >= 0 else int(rng.bit())
            self.r[p] = b
            return b, False
        sx = np.zeros(n, dtype=bool)
        sz = np.zeros(n, dtype=bool)
        sr = 0
        for i in np.flatnonzero(anti[:n]):
            row = n + int(i)
            g = int(_g_sum(self.x[row], self.z[row], sx, sz))
            sr = ((2 * sr + 2 * int(self.r[row]) + g) % 4) >> 1
            sx ^= self.x[row]
            sz ^= self.z[row]
        return sr, True

    def subsystem_rank(self, cols):
        cols = np.asarray(cols, dtype=np.int64)
        n = self.n
        block = np.concatenate((self.x[n:, cols], self.z[n:, cols]), axis=1)
        return gf2_rank(block)
