# distutils: language = c++
"""Compiled kernels: RNG stream, graph dynamics, union-find, GF(2) rank and
the stabilizer tableau.  Semantics match ``sepsim._pycore`` exactly."""

from libc.math cimport fmod
from libc.stdint cimport uint8_t, uint64_t
from libcpp.vector cimport vector

import numpy as np

cdef extern from *:
    int popcount64 "__builtin_popcountll"(unsigned long long) nogil

BACKEND = "compiled"

cdef double PI = 3.141592653589793
cdef double TWO_PI = 2.0 * 3.141592653589793
cdef double SNAP = 1e-9

CLIFFORD = 0
IQP = 1
IDEALIZED = 2
cdef enum:
    C_CLIFFORD = 0
    C_IQP = 1
    C_IDEALIZED = 2

AXIS_BITS = ((1, 0), (1, 1), (0, 1))
MASK64 = (1 << 64) - 1


cdef inline double _reduce(double a) noexcept nogil:
    a = fmod(a, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    if a < SNAP or TWO_PI - a < SNAP:
        return 0.0
    return a


def reduce_angle(double a):
    """Reduce an angle into [0, 2pi), snapping near-multiples of 2pi to 0."""
    return _reduce(a)


cdef inline uint64_t _rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef class Rng:
    """xoshiro256** generator."""

    cdef uint64_t s[4]

    def __init__(self, state):
        vals = [int(v) & MASK64 for v in state]
        if len(vals) != 4:
            raise ValueError("xoshiro256** needs four 64-bit state words")
        if not any(vals):
            raise ValueError("xoshiro256** state must not be all zero")
        for i in range(4):
            self.s[i] = vals[i]

    cdef inline uint64_t _next(self) noexcept nogil:
        cdef uint64_t result = _rotl(self.s[1] * 5, 7) * 9
        cdef uint64_t t = self.s[1] << 17
        self.s[2] ^= self.s[0]
        self.s[3] ^= self.s[1]
        self.s[1] ^= self.s[2]
        self.s[0] ^= self.s[3]
        self.s[2] ^= t
        self.s[3] = _rotl(self.s[3], 45)
        return result

    cdef inline uint64_t _below(self, uint64_t n) noexcept nogil:
        return ((self._next() >> 32) * n) >> 32

    cdef inline int _bit(self) noexcept nogil:
        return <int>(self._next() >> 63)

    cdef inline double _uniform(self) noexcept nogil:
        return <double>(self._next() >> 11) * (1.0 / 9007199254740992.0)

    def next_u64(self):
        return self._next()

    def below(self, n):
        if not 1 <= n < 4294967296:
            raise ValueError("below(n) needs 1 <= n < 2**32")
        return self._below(n)

    def bit(self):
        return self._bit()

    def uniform(self):
        return self._uniform()

    def state(self):
        return (self.s[0], self.s[1], self.s[2], self.s[3])

    def copy(self):
        return Rng(self.state())


cdef class GraphCore:
    """Support graph with per-edge angles and per-node linear phases."""

    cdef readonly int n
    cdef readonly int mode
    cdef vector[vector[int]] nbr
    cdef vector[vector[double]] ang
    cdef vector[double] w

    def __init__(self, int n, int mode):
        if n < 1:
            raise ValueError("n must be positive")
        if mode not in (C_CLIFFORD, C_IQP, C_IDEALIZED):
            raise ValueError(f"unknown mode code {mode}")
        self.n = n
        self.mode = mode
        self.nbr.resize(n)
        self.ang.resize(n)
        self.w.assign(n, 0.0)

    def copy(self):
        cdef GraphCore other = GraphCore(self.n, self.mode)
        other.nbr = self.nbr
        other.ang = self.ang
        other.w = self.w
        return other

    cdef inline int _find(self, int i, int v) noexcept nogil:
        cdef size_t p
        for p in range(self.nbr[i].size()):
            if self.nbr[i][p] == v:
                return <int>p
        return -1

    cdef inline void _remove(self, int i, int v) noexcept nogil:
        cdef int p = self._find(i, v)
        cdef size_t last = self.nbr[i].size() - 1
        self.nbr[i][p] = self.nbr[i][last]
        self.ang[i][p] = self.ang[i][last]
        self.nbr[i].pop_back()
        self.ang[i].pop_back()

    cdef inline void _link(self, int i, int j, double a) noexcept nogil:
        self.nbr[i].push_back(j)
        self.ang[i].push_back(a)
        self.nbr[j].push_back(i)
        self.ang[j].push_back(a)

    cdef void _gate(self, int i, int j, double angle) noexcept nogil:
        cdef int p = self._find(i, j)
        cdef double a
        if p >= 0:
            if self.mode == C_CLIFFORD:
                self._remove(i, j)
                self._remove(j, i)
            elif self.mode == C_IQP:
                a = _reduce(self.ang[i][p] + angle)
                if a == 0.0:
                    self._remove(i, j)
                    self._remove(j, i)
                else:
                    self.ang[i][p] = a
                    self.ang[j][self._find(j, i)] = a
        else:
            if self.mode == C_IQP:
                a = _reduce(angle)
            else:
                a = PI
            if a != 0.0:
                self._link(i, j, a)

    cdef void _measure(self, int k, int s) noexcept nogil:
        cdef size_t idx
        cdef int i
        for idx in range(self.nbr[k].size()):
            i = self.nbr[k][idx]
            if s:
                self.w[i] = _reduce(self.w[i] + self.ang[k][idx])
            self._remove(i, k)
        self.nbr[k].clear()
        self.ang[k].clear()
        self.w[k] = 0.0

    cdef inline void _random_gate(self, Rng rng, bint uniform_angles) noexcept nogil:
        cdef int i = <int>rng._below(self.n)
        cdef int j = <int>rng._below(self.n - 1)
        cdef double u, angle
        if j >= i:
            j += 1
        if uniform_angles:
            u = rng._uniform()
            while u == 0.0:
                u = rng._uniform()
            angle = TWO_PI * u
        else:
            angle = PI
        self._gate(i, j, angle)

    cdef inline void _random_measurement(self, Rng rng) noexcept nogil:
        cdef int k = <int>rng._below(self.n)
        cdef int s = rng._bit()
        self._measure(k, s)

    def gate(self, int i, int j, double angle):
        self._gate(i, j, angle)

    def measure_reset(self, int k, int s):
        self._measure(k, s)

    def run(self, long steps, int gamma_u, int gamma_m, bint interleave,
            bint uniform_angles, Rng rng):
        cdef long t
        cdef int gl, ml, e
        if self.n < 2:
            raise ValueError("dynamics need at least two qubits")
        with nogil:
            for t in range(steps):
                if interleave:
                    gl = gamma_u
                    ml = gamma_m
                    while gl + ml:
                        if <int>rng._below(gl + ml) < gl:
                            self._random_gate(rng, uniform_angles)
                            gl -= 1
                        else:
                            self._random_measurement(rng)
                            ml -= 1
                else:
                    for e in range(gamma_u):
                        self._random_gate(rng, uniform_angles)
                    for e in range(gamma_m):
                        self._random_measurement(rng)

    def neighbors(self, int k):
        return [self.nbr[k][p] for p in range(self.nbr[k].size())]

    def angles(self, int k):
        return [self.ang[k][p] for p in range(self.ang[k].size())]

    def degrees(self):
        out = np.empty(self.n, dtype=np.int64)
        cdef long long[:] v = out
        cdef int i
        for i in range(self.n):
            v[i] = self.nbr[i].size()
        return out

    def get_w(self):
        return np.array([self.w[i] for i in range(self.n)], dtype=np.float64)

    def set_w(self, int k, double value):
        self.w[k] = _reduce(value)

    def edges(self):
        ii, jj, aa = [], [], []
        cdef int i, j
        cdef size_t p
        for i in range(self.n):
            for p in range(self.nbr[i].size()):
                j = self.nbr[i][p]
                if j > i:
                    ii.append(i)
                    jj.append(j)
                    aa.append(self.ang[i][p])
        return (np.array(ii, dtype=np.int64), np.array(jj, dtype=np.int64),
                np.array(aa, dtype=np.float64))

    def component_labels(self):
        cdef int n = self.n
        cdef vector[int] parent, size
        cdef int i, j, ri, rj, tmp
        cdef size_t p
        parent.resize(n)
        size.assign(n, 1)
        out = np.empty(n, dtype=np.int64)
        cdef long long[:] lab = out
        with nogil:
            for i in range(n):
                parent[i] = i
            for i in range(n):
                for p in range(self.nbr[i].size()):
                    j = self.nbr[i][p]
                    if j > i:
                        ri = i
                        while parent[ri] != ri:
                            parent[ri] = parent[parent[ri]]
                            ri = parent[ri]
                        rj = j
                        while parent[rj] != rj:
                            parent[rj] = parent[parent[rj]]
                            rj = parent[rj]
                        if ri != rj:
                            if size[ri] < size[rj]:
                                tmp = ri
                                ri = rj
                                rj = tmp
                            parent[rj] = ri
                            size[ri] += size[rj]
            for i in range(n):
                ri = i
                while parent[ri] != ri:
                    parent[ri] = parent[parent[ri]]
                    ri = parent[ri]
                lab[i] = ri
        return out

    def component_sizes(self):
        labels = self.component_labels()
        return np.bincount(labels, minlength=self.n)[np.unique(labels)]


cdef int _rank_packed(vector[uint64_t]& m, int rows, int words, int cols) noexcept nogil:
    cdef int rank = 0
    cdef int c, c2, r, p, wd
    cdef uint64_t bit, tmp
    for c in range(cols):
        if rank == rows:
            break
        wd = c >> 6
        bit = (<uint64_t>1) << (c & 63)
        p = -1
        for r in range(rank, rows):
            if m[r * words + wd] & bit:
                p = r
                break
        if p < 0:
            continue
        if p != rank:
            for c2 in range(words):
                tmp = m[p * words + c2]
                m[p * words + c2] = m[rank * words + c2]
                m[rank * words + c2] = tmp
        for r in range(rows):
            if r != rank and (m[r * words + wd] & bit):
                for c2 in range(wd, words):
                    m[r * words + c2] ^= m[rank * words + c2]
        rank += 1
    return rank


def gf2_rank(mat):
    """Rank over GF(2) of a 2-D array of bits."""
    a = (np.asarray(mat) % 2).astype(np.uint8)
    if a.ndim != 2:
        raise ValueError("gf2_rank expects a 2-D array")
    cdef int rows = a.shape[0]
    cdef int cols = a.shape[1]
    if rows == 0 or cols == 0:
        return 0
    cdef int words = (cols + 63) // 64
    cdef vector[uint64_t] m
    m.assign(rows * words, 0)
    cdef const uint8_t[:, :] v = a
    cdef int r, c
    for r in range(rows):
        for c in range(cols):
            if v[r, c]:
                m[r * words + (c >> 6)] |= (<uint64_t>1) << (c & 63)
    with nogil:
        r = _rank_packed(m, rows, words, cols)
    return r


cdef class TableauCore:
    """Stabilizer/destabilizer tableau on packed 64-bit words.

    Rows 0..n-1 are destabilizers, n..2n-1 stabilizers, row 2n is scratch.
    """

    cdef readonly int n
    cdef int W
    cdef vector[uint64_t] x
    cdef vector[uint64_t] z
    cdef vector[uint8_t] r

    def __init__(self, int n):
        if n < 1:
            raise ValueError("n must be positive")
        self.n = n
        self.W = (n + 63) // 64
        self.x.assign((2 * n + 1) * self.W, 0)
        self.z.assign((2 * n + 1) * self.W, 0)
        self.r.assign(2 * n + 1, 0)
        cdef int i
        for i in range(n):
            self._set(self.x, i, i, 1)
            self._set(self.z, n + i, i, 1)

    def copy(self):
        cdef TableauCore other = TableauCore.__new__(TableauCore)
        other.n = self.n
        other.W = self.W
        other.x = self.x
        other.z = self.z
        other.r = self.r
        return other

    cdef inline int _get(self, vector[uint64_t]& v, int row, int q) noexcept nogil:
        return <int>((v[row * self.W + (q >> 6)] >> (q & 63)) & 1)

    cdef inline void _set(self, vector[uint64_t]& v, int row, int q, int b) noexcept nogil:
        cdef uint64_t bit = (<uint64_t>1) << (q & 63)
        if b:
            v[row * self.W + (q >> 6)] |= bit
        else:
            v[row * self.W + (q >> 6)] &= ~bit

    def load(self, x, z, r):
        xa = np.asarray(x, dtype=np.uint8) & 1
        za = np.asarray(z, dtype=np.uint8) & 1
        ra = np.asarray(r, dtype=np.uint8) & 1
        cdef int n = self.n
        if xa.shape != (2 * n, n) or za.shape != xa.shape or ra.shape != (2 * n,):
            raise ValueError("tableau arrays have the wrong shape")
        cdef const uint8_t[:, :] xv = xa
        cdef const uint8_t[:, :] zv = za
        cdef int i, q
        self.x.assign((2 * n + 1) * self.W, 0)
        self.z.assign((2 * n + 1) * self.W, 0)
        for i in range(2 * n):
            self.r[i] = ra[i]
            for q in range(n):
                if xv[i, q]:
                    self._set(self.x, i, q, 1)
                if zv[i, q]:
                    self._set(self.z, i, q, 1)
        self.r[2 * n] = 0

    def arrays(self):
        cdef int n = self.n
        xa = np.zeros((2 * n, n), dtype=np.uint8)
        za = np.zeros((2 * n, n), dtype=np.uint8)
        ra = np.zeros(2 * n, dtype=np.uint8)
        cdef uint8_t[:, :] xv = xa
        cdef uint8_t[:, :] zv = za
        cdef int i, q
        for i in range(2 * n):
            ra[i] = self.r[i]
            for q in range(n):
                xv[i, q] = self._get(self.x, i, q)
                zv[i, q] = self._get(self.z, i, q)
        return xa, za, ra

    def h(self, int q):
        cdef int i, xb, zb
        for i in range(2 * self.n):
            xb = self._get(self.x, i, q)
            zb = self._get(self.z, i, q)
            self.r[i] ^= xb & zb
            self._set(self.x, i, q, zb)
            self._set(self.z, i, q, xb)

    def s(self, int q):
        cdef int i, xb, zb
        for i in range(2 * self.n):
            xb = self._get(self.x, i, q)
            zb = self._get(self.z, i, q)
            self.r[i] ^= xb & zb
            self._set(self.z, i, q, zb ^ xb)

    def cz(self, int a, int b):
        cdef int i, xa, xb, za, zb
        for i in range(2 * self.n):
            xa = self._get(self.x, i, a)
            xb = self._get(self.x, i, b)
            za = self._get(self.z, i, a)
            zb = self._get(self.z, i, b)
            self.r[i] ^= xa & xb & (za ^ zb)
            self._set(self.z, i, a, za ^ xb)
            self._set(self.z, i, b, zb ^ xa)

    cdef void _rowsum(self, int dst, int src) noexcept nogil:
        # row dst <- row src * row dst
        cdef int W = self.W
        cdef int k
        cdef long g = 0
        cdef uint64_t x1, z1, x2, z2, plus, minus
        for k in range(W):
            x1 = self.x[src * W + k]
            z1 = self.z[src * W + k]
            x2 = self.x[dst * W + k]
            z2 = self.z[dst * W + k]
            plus = (x1 & z1 & z2 & ~x2) | (x1 & ~z1 & x2 & z2) | (~x1 & z1 & x2 & ~z2)
            minus = (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & ~x2 & z2) | (~x1 & z1 & x2 & z2)
            g += popcount64(plus) - popcount64(minus)
            self.x[dst * W + k] = x1 ^ x2
            self.z[dst * W + k] = z1 ^ z2
        g += 2 * self.r[dst] + 2 * self.r[src]
        g = ((g % 4) + 4) % 4
        self.r[dst] = <uint8_t>(g >> 1)

    def measure(self, int q, int axis, rng, int forced=-1):
        """Measure X/Y/Z (axis 0/1/2) on qubit q; returns (bit, deterministic)."""
        cdef int n = self.n
        cdef int W = self.W
        cdef int px, pz, i, p, k, b
        px, pz = AXIS_BITS[axis]
        cdef vector[uint8_t] anti
        anti.assign(2 * n, 0)
        for i in range(2 * n):
            anti[i] = (pz & self._get(self.x, i, q)) ^ (px & self._get(self.z, i, q))
        p = -1
        for i in range(n, 2 * n):
            if anti[i]:
                p = i
                break
        if p >= 0:
            with nogil:
                for i in range(2 * n):
                    if anti[i] and i != p:
                        self._rowsum(i, p)
                for k in range(W):
                    self.x[(p - n) * W + k] = self.x[p * W + k]
                    self.z[(p - n) * W + k] = self.z[p * W + k]
                    self.x[p * W + k] = 0
                    self.z[p * W + k] = 0
                self.r[p - n] = self.r[p]
                self._set(self.x, p, q, px)
                self._set(self.z, p, q, pz)
            if forced >= 0:
                b = forced
            else:
                b = int(rng.bit())
            self.r[p] = b
            return b, False
        cdef int s = 2 * n
        for k in range(W):
            self.x[s * W + k] = 0
            self.z[s * W + k] = 0
        self.r[s] = 0
        with nogil:
            for i in range(n):
                if anti[i]:
                    self._rowsum(s, n + i)
        return int(self.r[s]), True

    def subsystem_rank(self, cols):
        cdef const long long[:] cv = np.ascontiguousarray(cols, dtype=np.int64)
        cdef int na = cv.shape[0]
        cdef int n = self.n
        if na == 0:
            return 0
        cdef int ncol = 2 * na
        cdef int words = (ncol + 63) // 64
        cdef vector[uint64_t] m
        m.assign(n * words, 0)
        cdef int i, c, q, rank
        for i in range(n):
            for c in range(na):
                q = cv[c]
                if self._get(self.x, n + i, q):
                    m[i * words + (c >> 6)] |= (<uint64_t>1) << (c & 63)
                if self._get(self.z, n + i, q):
                    m[i * words + ((na + c) >> 6)] |= (<uint64_t>1) << ((na + c) & 63)
        with nogil:
            rank = _rank_packed(m, n, words, ncol)
        return rank
