"""Experiment drivers.  Each returns an ``ExperimentOutput`` of CSV tables plus
manifest extras; ``run_experiment`` writes them and the manifest."""

from __future__ import annotations

import math
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .. import __version__, theory
from .._backend import get_backend
from ..dynamics import DynamicsParams, run_ensemble, simulate, trajectory_states
from ..graph_state import Bipartition, bipartite_entropy_clifford
from ..iqp import MAX_COMPONENT, component_return_probabilities
from ..percolation import InsufficientBinsError, collapse_quality, power_law_fit
from ..tableau import entangling_power_experiment
from .config import ExperimentConfig
from .output import read_csv, staged_output

DEFAULT_G = {
    "spin-entropy": tuple(round(0.2 * i, 12) for i in range(1, 16)),
    "cluster-mass": tuple(round(0.1 * i, 12) for i in range(1, 16)),
    "cluster-distribution": (0.68,),
    "susceptibility": tuple(round(0.55 + 0.025 * i, 12) for i in range(13)),
    "entangling-power": (0.1, 0.3, 0.5, 2.0 / 3.0, 0.8, 1.0, 1.5),
    "iqp-return-prob": (0.8, 1.0, 1.5, 2.0, 3.0),
}
ENTROPY_FRACTIONS = (0.1, 0.25, 0.5)


@dataclass
class Table:
    header: list
    rows: list = field(default_factory=list)


@dataclass
class ExperimentOutput:
    tables: dict = field(default_factory=dict)  # file name -> Table
    extra: dict = field(default_factory=dict)
    scripts: dict = field(default_factory=dict)  # file name -> gnuplot text
    ok: bool = True


def point_seed(master: int, *key: int) -> int:
    """Independent 64-bit master seed for one (g, N) grid point."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def _grid(cfg: ExperimentConfig) -> tuple:
    return cfg.g if cfg.g else DEFAULT_G.get(cfg.experiment, ())


def make_params(cfg: ExperimentConfig, g: float, seed: int, burn_in=None) -> DynamicsParams:
    return DynamicsParams.from_g(
        g, max_gamma_u=cfg.max_gamma_u, mode=cfg.mode,
        angle_dist=cfg.resolved_angle_dist(), ordering=cfg.ordering,
        burn_in_timesteps=burn_in if burn_in is not None else cfg.burn_in,
        master_seed=seed,
    )


def _points(cfg):
    for gi, g in enumerate(_grid(cfg)):
        for ni, n in enumerate(cfg.sizes):
            yield gi, g, ni, n, point_seed(cfg.seed, gi, ni)


def _ensemble(cfg, n, params, reducer, **kw):
    return run_ensemble(n, params, cfg.traj, reducer, threads=cfg.threads, **kw)


# --- spin entropy ---------------------------------------------------------

def spin_entropy(cfg: ExperimentConfig) -> ExperimentOutput:
    if cfg.mode == "iqp":
        raise ValueError("spin entropy from the degree law needs a graph (clifford) state")
    out = ExperimentOutput()
    steady = Table(["g", "N", "gamma_u", "gamma_m", "mc_mean_bits", "mc_stderr_bits",
                    "count", "seed", "analytic_bits"])
    timed = Table(["g", "N", "step", "mt", "mc_mean_bits", "mc_stderr_bits", "count",
                   "seed", "analytic_bits"])
    sub = Table(["g", "N", "fraction", "step", "mt", "sa_per_n_mean", "sa_per_n_stderr",
                 "count", "seed", "bound"])
    want_sub = cfg.mode == "clifford" and bool(cfg.times)
    for gi, g, ni, n, seed in _points(cfg):
        base = make_params(cfg, g, seed)
        steps = sorted({int(round(t * n / base.gamma_m)) for t in cfg.times}) if cfg.times else []
        burn = max([base.burn_in(n)] + steps)
        p = replace(base, burn_in_timesteps=burn) if steps and burn != base.burn_in(n) else base
        fracs = [f for f in ENTROPY_FRACTIONS if int(f * n) >= 1] if want_sub else []

        def reducer(records, state, rng, steps=steps):
            by_step = {r.timestep: r for r in records}
            vals = [records[-1].spin_entropy]
            vals += [by_step[s].spin_entropy for s in steps]
            return vals

        res = _ensemble(cfg, n, p, reducer, snapshot_steps=steps or None)
        steady.rows.append([g, n, p.gamma_u, p.gamma_m, float(res.mean[0]), float(res.stderr[0]),
                            res.count, seed, theory.steady_spin_entropy(p.g)])
        for j, s in enumerate(steps):
            mt = p.mt(n, s)
            timed.rows.append([g, n, s, mt, float(res.mean[j + 1]), float(res.stderr[j + 1]),
                               res.count, seed, theory.single_spin_entropy(p.g, mt)])
        if fracs and steps:
            for row in subsystem_entropy_rows(cfg, n, p, steps, fracs, seed):
                sub.rows.append([g] + row)
    out.tables["spin_entropy.csv"] = steady
    if timed.rows:
        out.tables["spin_entropy_time.csv"] = timed
    if sub.rows:
        out.tables["subsystem_entropy.csv"] = sub
    out.scripts["spin_entropy.gp"] = _gp_script(
        "spin_entropy.csv", "g", "single-spin entropy (bits)",
        ["using 1:5:6 with yerrorbars title 'Monte Carlo'", "using 1:9 with lines title 'theory'"])
    return out


def subsystem_entropy_rows(cfg, n, params, steps, fracs, seed):
    """S_A / N for A = the first fraction*N spins at each snapshot step,
    next to the upper bound at the same mt."""
    marks = sorted(set(steps))
    parts = [Bipartition(n, range(int(f * n))) for f in fracs]

    def traj(index):
        return np.array([[bipartite_entropy_clifford(st, part) / n for part in parts]
                         for _, st in trajectory_states(n, params, marks, index)])

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            data = np.stack(list(pool.map(traj, range(cfg.traj))))
    else:
        data = np.stack([traj(i) for i in range(cfg.traj)])
    mean = data.mean(axis=0)
    if data.shape[0] > 1:
        se = data.std(axis=0, ddof=1) / math.sqrt(data.shape[0])
    else:
        se = np.full(mean.shape, np.nan)
    rows = []
    for si, s in enumerate(marks):
        mt = params.mt(n, s)
        for fi, f in enumerate(fracs):
            rows.append([n, f, s, mt, float(mean[si, fi]), float(se[si, fi]), data.shape[0], seed,
                         theory.entanglement_upper_bound(f, params.g, mt)])
    return rows


# --- clusters -------------------------------------------------------------

def _cluster_reducer(records, state, rng):
    c = records[-1].clusters
    return [c.m, c.chi]


def cluster_mass(cfg: ExperimentConfig) -> ExperimentOutput:
    out = ExperimentOutput()
    t = Table(["g", "N", "m_mean", "m_stderr", "count", "seed", "analytic_m"])
    for gi, g, ni, n, seed in _points(cfg):
        p = make_params(cfg, g, seed)
        res = _ensemble(cfg, n, p, _cluster_reducer)
        t.rows.append([g, n, float(res.mean[0]), float(res.stderr[0]), res.count, seed,
                       theory.giant_mass(p.g)])
    out.tables["cluster_mass.csv"] = t
    out.scripts["cluster_mass.gp"] = _gp_script(
        "cluster_mass.csv", "g", "largest-cluster fraction m",
        ["using 1:3:4 with yerrorbars title 'Monte Carlo'", "using 1:7 with lines title 'theory'"])
    return out


def susceptibility(cfg: ExperimentConfig) -> ExperimentOutput:
    out = ExperimentOutput()
    t = Table(["g", "N", "chi_mean", "chi_stderr", "m_mean", "m_stderr", "count", "seed"])
    for gi, g, ni, n, seed in _points(cfg):
        p = make_params(cfg, g, seed)
        res = _ensemble(cfg, n, p, _cluster_reducer)
        t.rows.append([g, n, float(res.mean[1]), float(res.stderr[1]), float(res.mean[0]),
                       float(res.stderr[0]), res.count, seed])
    out.tables["susceptibility.csv"] = t
    out.scripts["susceptibility.gp"] = _gp_script(
        "susceptibility.csv", "g", "chi", ["using 1:3:4 with yerrorbars title 'chi'"])
    return out


def cutoff_size(g: float, g_c: float = theory.G_C) -> float:
    """Mean-field cutoff cluster size s(g) ~ (g_c / |g - g_c|)^2."""
    if g == g_c:
        return math.inf
    return (g_c / abs(g - g_c)) ** 2


def pooled_cluster_histogram(n: int, params: DynamicsParams, n_traj: int, threads: int = 1) -> np.ndarray:
    """Finite-cluster counts by size summed over trajectories (exact integers)."""
    def one(index):
        records, _, _ = simulate(n, params, index)
        return records[-1].clusters.histogram(n)

    total = np.zeros(n + 1, dtype=np.int64)
    batch = 256
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for start in range(0, n_traj, batch):
            for h in pool.map(one, range(start, min(n_traj, start + batch))):
                total += h
    return total


def cluster_distribution(cfg: ExperimentConfig) -> ExperimentOutput:
    out = ExperimentOutput()
    t = Table(["g", "N", "k", "clusters", "n_k"])
    fits = []
    for gi, g, ni, n, seed in _points(cfg):
        p = make_params(cfg, g, seed)
        hist = pooled_cluster_histogram(n, p, cfg.traj, cfg.threads)
        k = np.arange(n + 1)
        nk = hist / (n * cfg.traj)
        for kk in np.flatnonzero(hist):
            t.rows.append([g, n, int(kk), int(hist[kk]), float(nk[kk])])
        entry = {"g": g, "N": n, "seed": seed, "trajectories": cfg.traj,
                 "cutoff_size": cutoff_size(p.g, cfg.g_c)}
        try:
            f = power_law_fit(k[1:], nk[1:], counts=hist[1:], k_min=cfg.k_min,
                              cutoff=cutoff_size(p.g, cfg.g_c))
            entry.update(tau=f.tau, tau_stderr=f.stderr, tau_ci95=list(f.ci), bins=len(f.k_centers),
                         curvature=f.curvature, curvature_stderr=f.curvature_stderr,
                         cutoff_dominated=f.cutoff_dominated)
        except InsufficientBinsError as exc:
            entry.update(tau=None, rejected=str(exc))
        fits.append(entry)
    out.tables["cluster_distribution.csv"] = t
    out.extra["power_law_fits"] = fits
    out.scripts["cluster_distribution.gp"] = _gp_script(
        "cluster_distribution.csv", "k", "n_k", ["using 3:5 with points title 'n_k'"], log=True)
    return out


# --- entangling power -----------------------------------------------------

def entangling_reducer(basis: str):
    def reducer(records, state, rng):
        n = state.n
        a = int(rng.below(n))
        b = int(rng.below(n - 1))
        if b >= a:
            b += 1
        r = entangling_power_experiment(state, a, b, basis, rng)
        return [r.delta, r.i_before, r.i_after]
    return reducer


def entangling_power(cfg: ExperimentConfig) -> ExperimentOutput:
    out = ExperimentOutput()
    t = Table(["g", "N", "dI_mean_bits", "dI_stderr_bits", "i_before_mean_bits",
               "i_after_mean_bits", "count", "seed", "basis"])
    by_n = {}
    for gi, g, ni, n, seed in _points(cfg):
        p = make_params(cfg, g, seed)
        res = _ensemble(cfg, n, p, entangling_reducer(cfg.basis))
        t.rows.append([g, n, float(res.mean[0]), float(res.stderr[0]), float(res.mean[1]),
                       float(res.mean[2]), res.count, seed, cfg.basis])
        if abs(p.g - cfg.g_c) < 1e-12:
            by_n[n] = (float(res.mean[0]), float(res.stderr[0]))
    out.tables["entangling_power.csv"] = t
    if len(by_n) >= 2:
        out.extra["critical_fit"] = critical_exponent_fit(by_n)
    out.scripts["entangling_power.gp"] = _gp_script(
        "entangling_power.csv", "g", "entangling power (bits)", ["using 1:3:4 with yerrorbars title 'dI'"])
    return out


def critical_exponent_fit(by_n: dict) -> dict:
    """Weighted fit of log dI = c - (beta/nu) log N at g = g_c."""
    ns = np.array(sorted(by_n), dtype=float)
    y = np.array([by_n[int(n)][0] for n in ns])
    se = np.array([by_n[int(n)][1] for n in ns])
    if np.any(y <= 0) or np.any(~np.isfinite(se)):
        return {"beta_over_nu": None, "reason": "non-positive mean or missing error at some N",
                "sizes": ns.tolist(), "means": y.tolist()}
    sig = np.where(se > 0, se / y, np.nan)
    w = np.where(np.isfinite(sig) & (sig > 0), 1.0 / sig, 1.0)
    a = np.column_stack([np.ones_like(ns), np.log(ns)]) * w[:, None]
    coef, *_ = np.linalg.lstsq(a, np.log(y) * w, rcond=None)
    cov = np.linalg.pinv(a.T @ a)
    return {"beta_over_nu": float(-coef[1]), "stderr": float(math.sqrt(cov[1, 1])),
            "sizes": ns.tolist(), "means": y.tolist(), "stderrs": se.tolist()}


# --- collapse -------------------------------------------------------------

_COLLAPSE_COLUMNS = ("chi_mean", "m_mean", "dI_mean_bits")


def load_dataset(path: str, column: str | None):
    header, rows = read_csv(path)
    if column is None:
        column = next((c for c in _COLLAPSE_COLUMNS if c in header), None)
        if column is None:
            raise ValueError(f"{path}: no observable column found; pass --column")
    for need in ("g", "N", column):
        if need not in header:
            raise ValueError(f"{path}: missing column {need!r}")
    g = np.array([float(r["g"]) for r in rows])
    n = np.array([float(r["N"]) for r in rows])
    y = np.array([float(r[column]) for r in rows])
    return g, n, y, column


def collapse(cfg: ExperimentConfig) -> ExperimentOutput:
    g, n, y, column = load_dataset(cfg.input, cfg.column)
    if np.unique(n).size < 3:
        raise ValueError(f"collapse needs at least three system sizes, found {np.unique(n).size}")
    out = ExperimentOutput()
    candidates = list(cfg.grid)
    if cfg.exponents and tuple(cfg.exponents) not in candidates:
        candidates.insert(0, tuple(cfg.exponents))
    scores = Table(["a", "b", "score"])
    best = None
    for a, b in candidates:
        s = collapse_quality(g, n, y, a, b, cfg.g_c)
        scores.rows.append([a, b, s])
        if best is None or s < best[2]:
            best = (a, b, s)
    a, b = cfg.exponents if cfg.exponents else best[:2]
    pts = Table(["g", "N", "x", "y_scaled"])
    xs = n ** a * np.abs(g - cfg.g_c)
    ys = n ** b * y
    for row in sorted(zip(n, g, xs, ys)):
        pts.rows.append([float(row[1]), int(row[0]), float(row[2]), float(row[3])])
    out.tables["collapse.csv"] = pts
    out.tables["collapse_scores.csv"] = scores
    out.extra.update(column=column, exponents=[a, b], score=collapse_quality(g, n, y, a, b, cfg.g_c),
                     best=list(best), g_c=cfg.g_c)
    out.scripts["collapse.gp"] = _gp_script("collapse.csv", "N^a |g - g_c|", "N^b y",
                                            ["using 3:4 with points title 'collapse'"])
    return out


# --- iqp return probability -----------------------------------------------

def iqp_return_prob(cfg: ExperimentConfig) -> ExperimentOutput:
    out = ExperimentOutput()
    t = Table(["g", "N", "log_p_brute_mean", "log_p_brute_stderr", "log_p_tree_mean",
               "log_p_tree_stderr", "abs_log_diff_mean", "loop_fraction", "count", "skipped", "seed"])

    def reducer(records, state, rng):
        comps = component_return_probabilities(state, MAX_COMPONENT)
        if any(math.isnan(c[2]) for c in comps):
            return [math.nan] * 4
        lb = sum(math.log(c[2]) if c[2] > 0 else -math.inf for c in comps)
        lt = sum(math.log(c[3]) if c[3] > 0 else -math.inf for c in comps)
        return [lb, lt, abs(lb - lt), float(any(c[1] for c in comps))]

    for gi, g, ni, n, seed in _points(cfg):
        p = make_params(cfg, g, seed)
        res = _ensemble(cfg, n, p, reducer)
        v = res.values
        ok = np.all(np.isfinite(v), axis=1)
        good = v[ok]
        cnt = int(good.shape[0])

        def mse(col):
            if cnt == 0:
                return math.nan, math.nan
            m = float(good[:, col].mean())
            s = float(good[:, col].std(ddof=1) / math.sqrt(cnt)) if cnt > 1 else math.nan
            return m, s

        mb, sb = mse(0)
        mt, st = mse(1)
        md, _ = mse(2)
        ml, _ = mse(3)
        t.rows.append([g, n, mb, sb, mt, st, md, ml, cnt, int((~ok).sum()), seed])
    out.tables["iqp_return_prob.csv"] = t
    out.scripts["iqp_return_prob.gp"] = _gp_script(
        "iqp_return_prob.csv", "g", "log P",
        ["using 1:3:4 with yerrorbars title 'brute force'", "using 1:5:6 with yerrorbars title 'tree formula'"])
    return out


# --- selftest -------------------------------------------------------------

def selftest(cfg: ExperimentConfig) -> ExperimentOutput:
    from . import selfchecks

    out = ExperimentOutput()
    t = Table(["check", "passed", "detail"])
    for name, passed, detail in selfchecks.run_all(cfg.seed):
        t.rows.append([name, passed, detail])
    out.ok = all(r[1] for r in t.rows)
    out.tables["selftest.csv"] = t
    return out


RUNNERS = {
    "spin-entropy": spin_entropy,
    "cluster-mass": cluster_mass,
    "cluster-distribution": cluster_distribution,
    "susceptibility": susceptibility,
    "entangling-power": entangling_power,
    "collapse": collapse,
    "iqp-return-prob": iqp_return_prob,
    "selftest": selftest,
}


def _gp_script(csv_name, xlabel, ylabel, plots, log=False) -> str:
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
    ]
    if log:
        lines.append("set logscale xy")
    body = ", \\\n     ".join(f"'{csv_name}' {p}" for p in plots)
    lines.append(f"plot {body}")
    return "\n".join(lines) + "\n"


def compute(cfg: ExperimentConfig) -> ExperimentOutput:
    return RUNNERS[cfg.experiment](cfg)


def run_experiment(cfg: ExperimentConfig) -> tuple[ExperimentOutput, dict]:
    """Compute and write all outputs of ``cfg`` into ``cfg.out``.

    CSV files depend only on the config (not on thread count or wall
    time); the manifest adds provenance.  Nothing is written on failure.
    """
    t0 = time.perf_counter()
    with staged_output(cfg.out) as od:
        result = compute(cfg)
        h = cfg.hash()
        for name, table in result.tables.items():
            od.write_csv(name, table.header, table.rows, h)
        if cfg.gnuplot:
            for name, text in result.scripts.items():
                od.write_text(name, text)
        digests = od.digests()
        manifest = {
            "experiment": cfg.experiment,
            "config": cfg.to_dict(),
            "config_hash": h,
            "master_seed": cfg.seed,
            "code_version": __version__,
            "backend": get_backend().BACKEND,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "wall_time_s": round(time.perf_counter() - t0, 3),
            "files": digests,
            "results": result.extra,
            "passed": result.ok,
        }
        od.write_json("manifest.json", manifest)
    return result, manifest
