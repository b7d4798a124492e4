"""Cluster statistics of the support graph and finite-size-scaling analysis."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .theory import G_C


class InsufficientBinsError(ValueError):
    """Too few populated bins for a power-law fit."""


@dataclass(frozen=True)
class ClusterStats:
    """Finite-cluster counts with the single largest cluster excluded.

    ``counts[k]`` is the number of finite clusters of size k, so
    ``largest_size + sum(k * counts[k]) == n`` exactly.
    """

    n: int
    counts: dict
    largest_size: int

    @property
    def n_k(self) -> dict:
        """Clusters of size k per node."""
        return {k: c / self.n for k, c in self.counts.items()}

    @property
    def m(self) -> float:
        return self.largest_size / self.n

    @property
    def chi(self) -> float:
        return sum(k * k * c for k, c in self.counts.items()) / self.n

    def histogram(self, kmax: int | None = None) -> np.ndarray:
        """Dense count array indexed by cluster size (index 0 unused)."""
        size = (kmax if kmax is not None else self.n) + 1
        h = np.zeros(size, dtype=np.int64)
        for k, c in self.counts.items():
            if k < size:
                h[k] = c
        return h


def stats_from_sizes(sizes) -> ClusterStats:
    sizes = np.asarray(sizes, dtype=np.int64)
    n = int(sizes.sum())
    if sizes.size == 0:
        raise ValueError("no clusters")
    imax = int(np.argmax(sizes))
    largest = int(sizes[imax])
    rest = np.delete(sizes, imax)
    ks, cs = np.unique(rest, return_counts=True)
    return ClusterStats(n, {int(k): int(c) for k, c in zip(ks, cs)}, largest)


def cluster_statistics(state) -> ClusterStats:
    """Cluster statistics of an EvolvedState via union-find on its bonds."""
    return stats_from_sizes(state.core.component_sizes())


@dataclass(frozen=True)
class PowerLawFit:
    tau: float
    stderr: float
    ci: tuple
    k_centers: np.ndarray
    densities: np.ndarray
    curvature: float
    curvature_stderr: float

    @property
    def cutoff_dominated(self) -> bool:
        """Significant downward bending in log-log, the signature of an
        exponential cutoff inside the window."""
        return self.curvature < 0 and abs(self.curvature) > 3 * self.curvature_stderr


def _log_bins(k_min: int, k_max: int, base: float):
    edges = [k_min]
    while edges[-1] <= k_max:
        nxt = max(edges[-1] + 1, int(math.ceil(edges[-1] * base)))
        edges.append(min(nxt, k_max + 1))
        if edges[-1] == k_max + 1:
            break
    return np.array(edges)


def _bin_center(lo: int, hi: int, tau: float) -> float:
    """k whose k^-tau equals the mean of k^-tau over the integers [lo, hi)."""
    ks = np.arange(lo, hi, dtype=float)
    return float(np.mean(ks ** -tau) ** (-1.0 / tau))


def power_law_fit(k, n_k, *, counts=None, k_min: int = 4, k_max: int | None = None,
                  cutoff: float | None = None, base: float = 1.25,
                  min_bins: int = 10) -> PowerLawFit:
    """Fit n_k ~ k^-tau by weighted least squares in log-log over
    logarithmic bins.

    The window is [k_min, k_max]; when ``cutoff`` (the cutoff cluster size
    s(g)) is given, k_max is further capped at cutoff / 4.  ``counts`` are the
    raw cluster counts behind ``n_k`` and set Poisson weights per bin.
    """
    k = np.asarray(k, dtype=np.int64)
    n_k = np.asarray(n_k, dtype=float)
    if k.shape != n_k.shape:
        raise ValueError("k and n_k must have the same shape")
    hi = int(k.max()) if k_max is None else int(k_max)
    if cutoff is not None:
        hi = min(hi, int(cutoff / 4))
    if hi <= k_min:
        raise InsufficientBinsError(f"empty fit window [{k_min}, {hi}]")
    dense = np.zeros(hi + 1)
    dense_c = np.zeros(hi + 1)
    sel = (k >= k_min) & (k <= hi)
    np.add.at(dense, k[sel], n_k[sel])
    if counts is not None:
        np.add.at(dense_c, k[sel], np.asarray(counts, dtype=float)[sel])
    edges = _log_bins(k_min, hi, base)
    lo_e, hi_e = edges[:-1], edges[1:]
    dens = np.array([dense[a:b].sum() / (b - a) for a, b in zip(lo_e, hi_e)])
    pop = dens > 0
    if pop.sum() < min_bins:
        raise InsufficientBinsError(f"only {int(pop.sum())} populated bins, need {min_bins}")
    lo_e, hi_e, dens = lo_e[pop], hi_e[pop], dens[pop]
    if counts is not None:
        nc = np.array([dense_c[a:b].sum() for a, b in zip(lo_e, hi_e)])
        weights = np.sqrt(np.maximum(nc, 1.0))
    else:
        weights = np.ones_like(dens)
    y = np.log(dens)

    tau = 2.0
    for _ in range(4):
        centers = np.array([_bin_center(a, b, tau) for a, b in zip(lo_e, hi_e)])
        x = np.log(centers)
        coef, cov = _wls(np.column_stack([np.ones_like(x), x]), y, weights)
        tau = -coef[1]
    se = math.sqrt(cov[1, 1])
    xc = x - x.mean()
    qcoef, qcov = _wls(np.column_stack([np.ones_like(x), xc, xc ** 2]), y, weights)
    return PowerLawFit(
        tau=float(tau),
        stderr=se,
        ci=(float(tau - 1.96 * se), float(tau + 1.96 * se)),
        k_centers=centers,
        densities=dens,
        curvature=float(qcoef[2]),
        curvature_stderr=float(math.sqrt(qcov[2, 2])) if qcov.shape[0] > 2 else math.inf,
    )


def _wls(design, y, weights):
    a = design * weights[:, None]
    b = y * weights
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)
    dof = max(len(y) - design.shape[1], 1)
    resid = b - a @ coef
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.pinv(a.T @ a)
    return coef, cov


@dataclass(frozen=True)
class CollapsePoint:
    g: float
    n: int
    x: float
    y: float


def collapse_points(g, sizes, y, a: float, b: float, g_c: float = G_C) -> list[CollapsePoint]:
    """Rescale (g, N, y) to x = N^a |g - g_c|, y' = N^b y."""
    g = np.asarray(g, dtype=float)
    sizes = np.asarray(sizes, dtype=float)
    y = np.asarray(y, dtype=float)
    xs = sizes ** a * np.abs(g - g_c)
    ys = sizes ** b * y
    return [CollapsePoint(float(gi), int(ni), float(xi), float(yi))
            for gi, ni, xi, yi in zip(g, sizes, xs, ys)]


def _smooth_fit(x, y):
    """Least-squares cubic spline through a point cloud; falls back to a
    low-degree polynomial when the cloud is too small for interior knots."""
    from scipy.interpolate import make_lsq_spline

    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    ux = np.unique(x)
    if ux.size < 2:
        return y - y.mean(), order
    n_int = min(8, ux.size // 3 - 1)
    if n_int >= 1:
        interior = np.quantile(ux, np.linspace(0, 1, n_int + 2)[1:-1])
        t = np.concatenate([[x[0]] * 4, interior, [x[-1]] * 4])
        try:
            spl = make_lsq_spline(x, y, t, k=3)
            return y - spl(x), order
        except (ValueError, np.linalg.LinAlgError):
            pass
    deg = min(3, ux.size - 1)
    coef = np.polyfit(x, y, deg)
    return y - np.polyval(coef, x), order


def collapse_quality(g, sizes, y, a: float, b: float, g_c: float = G_C) -> float:
    """Relative mean-squared scatter of the rescaled data about a smooth curve.

    Points are split at g_c (the scaling function differs on the two sides),
    a spline is fitted to each pooled branch, and the squared residuals are
    normalised by the mean square of y' so that different b compare fairly.
    Lower is better.
    """
    g = np.asarray(g, dtype=float)
    sizes = np.asarray(sizes, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (g.shape == sizes.shape == y.shape) or g.ndim != 1:
        raise ValueError("g, sizes and y must be 1-D arrays of equal length")
    if g.size < 2:
        raise ValueError("collapse needs more than one point")
    if np.unique(sizes).size < 3:
        raise ValueError("collapse needs at least three system sizes")
    xs = sizes ** a * np.abs(g - g_c)
    ys = sizes ** b * y
    scale = float(np.mean(ys ** 2))
    if scale == 0:
        return 0.0
    sq = 0.0
    for branch in (g < g_c, g >= g_c):
        if branch.sum() == 0:
            continue
        resid, _ = _smooth_fit(xs[branch], ys[branch])
        sq += float(resid @ resid)
    return sq / g.size / scale
