"""Closed-form mean-field theory of the degree dynamics and the percolation
of the support graph.

Conventions: ``g = Gamma_m / (2 Gamma_u)``; ``s_k`` is the density of nodes of
degree ``k - 1``; ``mt`` is ``Gamma_m t`` (measurement events per spin);
``tau = 2 Gamma_u t`` is the rescaled time of the generating function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

G_C = 2.0 / 3.0
_SERIES_TOL = 1e-15
_MAX_K = 100_000


class RootFindingError(RuntimeError):
    """The implicit equation for q could not be solved."""


def _check_g(g: float) -> float:
    g = float(g)
    if not g > 0:
        raise ValueError(f"g must be positive, got {g}")
    return g


def regularized_gamma_q(k: int, a: float) -> float:
    """Gamma(k, a) / Gamma(k) for integer k >= 1, as e^{-a} sum_{j<k} a^j / j!."""
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if a < 0:
        raise ValueError(f"a must be non-negative, got {a}")
    k = int(k)
    if a == 0:
        return 1.0
    la = math.log(a)
    total = 0.0
    for j in range(k):
        total += math.exp(j * la - math.lgamma(j + 1) - a)
    return min(total, 1.0)


def regularized_gamma_p(k: int, a: float) -> float:
    """1 - Gamma(k, a)/Gamma(k), summed from the tail when that is the
    accurate side."""
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if a < 0:
        raise ValueError(f"a must be non-negative, got {a}")
    k = int(k)
    if a == 0:
        return 0.0
    if k <= a + 1:
        return max(0.0, 1.0 - regularized_gamma_q(k, a))
    la = math.log(a)
    term = math.exp(k * la - math.lgamma(k + 1) - a)
    total = 0.0
    j = k
    while term > 1e-300 and term > 1e-17 * total:
        total += term
        j += 1
        term *= a / j
    return total


def steady_state_sk(g: float, k: int) -> float:
    """Steady-state density of degree-(k-1) nodes, g [1 - Gamma(k,1/g)/Gamma(k)]."""
    g = _check_g(g)
    return g * regularized_gamma_p(k, 1.0 / g)


def steady_state_distribution(g: float, tol: float = _SERIES_TOL) -> np.ndarray:
    """Array ``s`` with ``s[k-1] = s_k``, truncated once past the bulk and
    below ``tol``."""
    g = _check_g(g)
    out = []
    k = 1
    while k < _MAX_K:
        v = steady_state_sk(g, k)
        out.append(v)
        if k > 1.0 / g + 1 and v < tol:
            break
        k += 1
    return np.array(out)


def mean_degree(g: float) -> float:
    return 1.0 / (2.0 * _check_g(g))


def single_spin_entropy(g: float, mt: float) -> float:
    """Average single-spin entropy (bits) of the clifford dynamics after
    ``mt`` measurement events per spin, i.e. 1 - s_1(t)."""
    g = _check_g(g)
    if mt < 0:
        raise ValueError("mt must be non-negative")
    if math.isinf(mt):
        return steady_spin_entropy(g)
    e = math.exp(-mt)
    u = -math.expm1(-mt)
    # 1 - g + g exp(-u/g)(1 - e/g), rearranged to avoid cancellation near mt = 0
    return u + (g - e) * math.expm1(-u / g)


def steady_spin_entropy(g: float) -> float:
    g = _check_g(g)
    return 1.0 + g * math.expm1(-1.0 / g)


def _expm1_over(w):
    """(e^w - 1)/w for complex or real arrays, accurate near w = 0."""
    w = np.asarray(w, dtype=complex)
    x, y = w.real, w.imag
    num = np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2 + 1j * np.exp(x) * np.sin(y)
    small = np.abs(w) < 1e-8
    safe = np.where(small, 1.0, w)
    return np.where(small, 1.0 + w / 2.0 + w * w / 6.0, num / safe)


def generating_function(g: float, z, tau: float):
    """F(z, tau) = sum_k z^k s_k(tau) from the closed-form solution with
    F(z, 0) = z.  ``tau = inf`` gives the steady state f(z)."""
    g = _check_g(g)
    if tau < 0:
        raise ValueError("tau must be non-negative")
    zc = np.asarray(z, dtype=complex)
    if np.any(np.abs(zc) > 1 + 1e-12):
        raise ValueError("|z| must not exceed 1")
    u = 1.0 - zc
    if math.isinf(tau):
        a, b = 0.0, 1.0 / g
    else:
        a = math.exp(-g * tau) / g
        b = -math.expm1(-g * tau) / g
    val = zc * g * (b * _expm1_over(-b * u) + a * np.exp(-b * u))
    if np.isrealobj(z) or np.all(np.imag(zc) == 0):
        val = val.real
    return val.item() if np.ndim(val) == 0 else val


def series_coefficients(g: float, tau: float, kmax: int, points: int | None = None) -> np.ndarray:
    """``s_1..s_kmax`` read off the Taylor coefficients of F(., tau) by a
    discrete Cauchy integral on the unit circle."""
    if points is None:
        points = 1 << max(8, int(math.ceil(math.log2(4 * (kmax + 1)))))
    zs = np.exp(2j * np.pi * np.arange(points) / points)
    vals = np.asarray(generating_function(g, zs, tau), dtype=complex)
    coef = np.fft.fft(vals) / points
    return coef.real[1: kmax + 1]


def rate_matrix(g: float, kmax: int = 200) -> np.ndarray:
    """Generator R (in tau units) with ds/dtau = R s for s_1..s_kmax, built
    from the transition rates gamma_{j->k} / (2 Gamma_u)
    = delta_{j,k-1} + g [k delta_{j,k+1} + delta_{k,1} (1 - delta_{j,1})].

    Transitions out of the truncated range are dropped, so columns sum to 0.
    """
    g = _check_g(g)
    r = np.zeros((kmax, kmax))
    for j in range(1, kmax + 1):
        for k in range(1, kmax + 1):
            if k == j:
                continue
            rate = 0.0
            if j == k - 1:
                rate += 1.0
            if j == k + 1:
                rate += g * k
            if k == 1 and j != 1:
                rate += g
            r[k - 1, j - 1] = rate
    r[np.diag_indices(kmax)] = -r.sum(axis=0)
    return r


def integrate_rate_equation(g: float, taus, kmax: int = 200) -> np.ndarray:
    """Integrate the degree rate equation from s_k(0) = delta_{k,1}.
    Returns an array of shape (len(taus), kmax)."""
    from scipy.integrate import solve_ivp

    taus = np.asarray(taus, dtype=float)
    r = rate_matrix(g, kmax)
    s0 = np.zeros(kmax)
    s0[0] = 1.0
    t_end = float(taus.max()) if taus.size else 0.0
    if t_end == 0.0:
        return np.tile(s0, (taus.size, 1))
    sol = solve_ivp(lambda t, y: r @ y, (0.0, t_end), s0, method="Radau",
                    t_eval=np.sort(taus), jac=r, rtol=1e-12, atol=1e-15)
    if not sol.success:
        raise RuntimeError(f"rate-equation integration failed: {sol.message}")
    order = np.argsort(np.argsort(taus))
    return sol.y.T[order]


def rate_equation_steady_state(g: float, kmax: int = 200) -> np.ndarray:
    """Normalised null vector of the truncated rate matrix."""
    r = rate_matrix(g, kmax)
    a = r.copy()
    a[-1, :] = 1.0
    rhs = np.zeros(kmax)
    rhs[-1] = 1.0
    return np.linalg.solve(a, rhs)


@dataclass(frozen=True)
class NeighborDistributions:
    """Q[k]: degree law of a random node; P[k]: degree law of a node reached
    along a random bond (k = 0, 1, ...)."""

    g: float
    Q: np.ndarray
    P: np.ndarray


def neighbor_distributions(g: float) -> NeighborDistributions:
    g = _check_g(g)
    s = steady_state_distribution(g)
    q = s.copy()  # Q_k = s_{k+1}
    k = np.arange(q.size)
    p = 2.0 * g * k * q
    return NeighborDistributions(g, q, p)


def mean_cluster_size(g: float) -> float:
    """Mean size of the cluster holding a random spin; ``inf`` at and below g_c."""
    g = _check_g(g)
    if g <= G_C:
        return math.inf
    return 1.0 / (1.0 - G_C / g)


def _q_residual(q: float, g: float) -> float:
    d = 1.0 - q
    return q * d * d + 2.0 * g * (math.exp(-d / g) * (d + g) - g)


def _reduced_residual(d: float, g: float) -> float:
    """Residual of the q-equation divided by (1 - q)^3, with d = 1 - q.

    The equation has a triple root at q = 1; dividing it out keeps the
    nontrivial root resolvable arbitrarily close to g_c.
    """
    x = d / g
    if x <= 1.0:
        total = 0.0
        term = 1.0 / 6.0  # x^{n-3} / n! at n = 3
        n = 3
        while True:
            contrib = (n - 1) * term * (1 if n % 2 == 1 else -1)
            total += contrib
            if abs(contrib) < 1e-18 * max(abs(total), 1e-300) and n > 6:
                break
            n += 1
            term *= x / n
        return -1.0 + (2.0 / g) * total
    return _q_residual(1.0 - d, g) / d ** 3


def solve_root_q(g: float) -> float:
    """Probability q that a node reached along a random bond lies in a finite
    cluster: smallest root in [0, 1) of
    q(1-q)^2 + 2g[e^{-(1-q)/g}(1-q+g) - g] = 0, or 1 if there is none."""
    from scipy.optimize import brentq

    g = _check_g(g)
    if g >= G_C:
        return 1.0
    grid = np.geomspace(1e-12, 1.0, 400)
    vals = np.array([_reduced_residual(d, g) for d in grid])
    sign_change = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)
    if sign_change.size == 0:
        raise RootFindingError(f"no bracketing interval for q at g={g}")
    i = sign_change[-1]
    try:
        d = brentq(_reduced_residual, grid[i], grid[i + 1], args=(g,),
                   xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    except (RuntimeError, ValueError) as exc:
        raise RootFindingError(f"q root finding failed at g={g}: {exc}") from exc
    return 1.0 - d


def giant_mass(g: float) -> float:
    """Fraction of spins in the extensive entangled cluster (0 for g >= g_c)."""
    g = _check_g(g)
    if g >= G_C:
        return 0.0
    d = 1.0 - solve_root_q(g)
    x = d / g
    return 1.0 + math.expm1(-x) / x


def entanglement_upper_bound(q_frac: float, g: float, mt: float) -> float:
    """Upper bound on S_A / N for a subsystem holding a fraction q_frac <= 1/2
    of the spins, after mt measurement events per spin."""
    g = _check_g(g)
    if not 0 <= q_frac <= 0.5:
        raise ValueError("the bound holds for subsystem fractions in [0, 1/2]")
    if mt < 0:
        raise ValueError("mt must be non-negative")
    grown = 1.0 if math.isinf(mt) else -math.expm1(-mt)
    return -q_frac * math.expm1(-grown * (1.0 - q_frac) / (2.0 * g))


@dataclass(frozen=True)
class TheoryPoint:
    g: float
    spin_entropy: float
    mean_degree: float
    mean_cluster_size: float
    q: float
    giant_mass: float


def theory_point(g: float) -> TheoryPoint:
    g = _check_g(g)
    return TheoryPoint(
        g=g,
        spin_entropy=steady_spin_entropy(g),
        mean_degree=mean_degree(g),
        mean_cluster_size=mean_cluster_size(g),
        q=solve_root_q(g),
        giant_mass=giant_mass(g),
    )
