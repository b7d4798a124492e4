"""Timestepped stochastic dynamics and seeded, schedule-independent ensembles.

One timestep applies ``gamma_u`` gates on uniformly random distinct pairs and
``gamma_m`` Z-measure-and-reset events on uniformly random spins.  Continuum
time is counted in measurement events per spin, ``mt = steps * gamma_m / n``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ._backend import get_backend
from .graph_state import EvolvedState, MODES
from .percolation import ClusterStats, cluster_statistics

ANGLE_DISTS = ("fixed-pi", "uniform")
ORDERINGS = ("gates-first", "interleaved")
BURN_IN_SWEEPS = 12


@dataclass(frozen=True)
class DynamicsParams:
    gamma_u: int
    gamma_m: int
    mode: str = "clifford"
    angle_dist: str = "fixed-pi"
    burn_in_timesteps: int | None = None
    master_seed: int = 0
    ordering: str = "gates-first"

    def __post_init__(self):
        if int(self.gamma_u) != self.gamma_u or self.gamma_u < 1:
            raise ValueError("gamma_u must be a positive integer")
        if int(self.gamma_m) != self.gamma_m or self.gamma_m < 0:
            raise ValueError("gamma_m must be a non-negative integer")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.angle_dist not in ANGLE_DISTS:
            raise ValueError(f"angle_dist must be one of {ANGLE_DISTS}")
        if self.ordering not in ORDERINGS:
            raise ValueError(f"ordering must be one of {ORDERINGS}")
        if self.mode == "clifford" and self.angle_dist != "fixed-pi":
            raise ValueError("clifford mode needs angle_dist='fixed-pi'")
        if self.burn_in_timesteps is not None and self.burn_in_timesteps < 1:
            raise ValueError("burn_in_timesteps must be at least 1")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ValueError("master_seed must fit in 64 bits")

    @property
    def g(self) -> float:
        return self.gamma_m / (2 * self.gamma_u)

    @property
    def g_exact(self) -> Fraction:
        return Fraction(self.gamma_m, 2 * self.gamma_u)

    @classmethod
    def from_g(cls, g: float, max_gamma_u: int = 64, **kwargs) -> "DynamicsParams":
        """Smallest integer rates with gamma_m / (2 gamma_u) closest to g."""
        if not g > 0:
            raise ValueError("g must be positive")
        ratio = Fraction(2 * g).limit_denominator(max_gamma_u)
        if ratio == 0:
            raise ValueError(f"g={g} is too small for gamma_u <= {max_gamma_u}")
        return cls(gamma_u=ratio.denominator, gamma_m=ratio.numerator, **kwargs)

    def burn_in(self, n: int) -> int:
        """Timesteps of equilibration; default gives each spin ~12 measurements."""
        if self.burn_in_timesteps is not None:
            return int(self.burn_in_timesteps)
        per_step = self.gamma_m if self.gamma_m else 2 * self.gamma_u
        return max(1, math.ceil(BURN_IN_SWEEPS * n / per_step))

    def mt(self, n: int, steps: int) -> float:
        return steps * self.gamma_m / n


@dataclass(frozen=True)
class DegreeHistogram:
    """``counts[d]`` nodes of degree d; ``s[k-1]`` is the density s_k."""

    counts: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def s(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    def s_k(self, k: int) -> float:
        if k < 1:
            raise ValueError("k starts at 1 (degree k - 1)")
        return float(self.counts[k - 1] / self.n) if k - 1 < self.counts.size else 0.0

    def mean_degree(self) -> float:
        return float(np.dot(np.arange(self.counts.size), self.counts) / self.n)


@dataclass(frozen=True)
class TrajectoryRecord:
    timestep: int
    mt: float
    degrees: DegreeHistogram
    clusters: ClusterStats
    spin_entropy: float | None = None


@dataclass
class EnsembleResult:
    values: np.ndarray  # one row per trajectory, trajectory-index order
    mean: np.ndarray = field(init=False)
    stderr: np.ndarray = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        self.values = v
        self.mean = v.mean(axis=0)
        if v.shape[0] > 1:
            self.stderr = v.std(axis=0, ddof=1) / math.sqrt(v.shape[0])
        else:
            self.stderr = np.full(v.shape[1], np.nan)

    @property
    def count(self) -> int:
        return self.values.shape[0]


def trajectory_rng(master_seed: int, index: int, backend=None):
    """Kernel RNG for trajectory ``index``, derived from (master_seed, index)."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    words = ss.generate_state(4, np.uint64)
    return get_backend(backend).Rng([int(w) for w in words])


def degree_distribution(state: EvolvedState) -> DegreeHistogram:
    deg = state.degrees()
    return DegreeHistogram(np.bincount(deg, minlength=1).astype(np.int64))


def _run_steps(state: EvolvedState, params: DynamicsParams, steps: int, rng) -> None:
    if steps:
        state.core.run(int(steps), params.gamma_u, params.gamma_m,
                       params.ordering == "interleaved",
                       params.angle_dist == "uniform", rng)


def advance_timestep(state: EvolvedState, params: DynamicsParams, rng) -> EvolvedState:
    """One timestep: gamma_u random gates, then gamma_m random measurements
    (or a uniformly shuffled mix with ordering='interleaved')."""
    if state.n < 2:
        raise ValueError("dynamics need at least two qubits")
    if state.mode != params.mode:
        raise ValueError(f"state mode {state.mode!r} does not match params mode {params.mode!r}")
    _run_steps(state, params, 1, rng)
    return state


def _snapshot(state: EvolvedState, params: DynamicsParams, step: int) -> TrajectoryRecord:
    hist = degree_distribution(state)
    ent = None
    if state.mode != "iqp":
        # graph state: a single spin carries one bit iff it has a neighbour
        ent = 1.0 - hist.s_k(1)
    return TrajectoryRecord(step, params.mt(state.n, step), hist, cluster_statistics(state), ent)


def simulate(n: int, params: DynamicsParams, index: int = 0, *,
             snapshot_cadence: int = 0, snapshot_steps: Sequence[int] | None = None,
             backend=None):
    """Run one trajectory; returns (records, final state, rng after the run)."""
    if n < 2:
        raise ValueError("dynamics need at least two qubits")
    if snapshot_cadence < 0:
        raise ValueError("snapshot cadence must be non-negative")
    total = params.burn_in(n)
    marks = {total}
    if snapshot_cadence:
        marks.update(range(0, total, snapshot_cadence))
    if snapshot_steps is not None:
        extra = {int(s) for s in snapshot_steps}
        if any(s < 0 or s > total for s in extra):
            raise ValueError(f"snapshot steps must lie in [0, {total}] (the burn-in length)")
        marks.update(extra)
    rng = trajectory_rng(params.master_seed, index, backend)
    state = EvolvedState(n, params.mode, backend=backend)
    records = []
    done = 0
    for mark in sorted(marks):
        _run_steps(state, params, mark - done, rng)
        done = mark
        records.append(_snapshot(state, params, mark))
    return records, state, rng


def trajectory_states(n: int, params: DynamicsParams, steps: Sequence[int], index: int = 0, *,
                      backend=None):
    """Yield ``(step, state)`` at each of the sorted ``steps`` of trajectory
    ``index``.  The same mutable state is yielded each time; copy it to keep it."""
    if n < 2:
        raise ValueError("dynamics need at least two qubits")
    rng = trajectory_rng(params.master_seed, index, backend)
    state = EvolvedState(n, params.mode, backend=backend)
    done = 0
    for mark in sorted({int(s) for s in steps}):
        if mark < 0:
            raise ValueError("steps must be non-negative")
        _run_steps(state, params, mark - done, rng)
        done = mark
        yield mark, state


def run_trajectory(n: int, params: DynamicsParams, snapshot_cadence: int = 0, *,
                   snapshot_steps: Sequence[int] | None = None, index: int = 0,
                   backend=None) -> list[TrajectoryRecord]:
    """Burn in, recording snapshots every ``snapshot_cadence`` steps (0: none)
    and at ``snapshot_steps``; the last record is the steady-state sample."""
    records, _, _ = simulate(n, params, index, snapshot_cadence=snapshot_cadence,
                             snapshot_steps=snapshot_steps, backend=backend)
    return records


Reducer = Callable[[list, EvolvedState, object], object]


def final_spin_entropy(records, state, rng):
    return records[-1].spin_entropy


def run_ensemble(n: int, params: DynamicsParams, n_traj: int, reducer: Reducer = final_spin_entropy,
                 *, threads: int = 1, snapshot_cadence: int = 0,
                 snapshot_steps: Sequence[int] | None = None, backend=None) -> EnsembleResult:
    """Run ``n_traj`` independent trajectories and reduce each one.

    ``reducer(records, final_state, rng)`` returns a scalar or 1-D array; the
    rng is the trajectory's stream after the dynamics, for any further
    randomness (e.g. picking spins).  Results are stacked in trajectory order,
    so aggregates do not depend on ``threads``.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    if threads < 1:
        raise ValueError("threads must be at least 1")

    def one(index):
        records, state, rng = simulate(n, params, index, snapshot_cadence=snapshot_cadence,
                                       snapshot_steps=snapshot_steps, backend=backend)
        return np.atleast_1d(np.asarray(reducer(records, state, rng), dtype=float))

    if threads == 1:
        rows = [one(i) for i in range(n_traj)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, range(n_traj)))
    return EnsembleResult(np.vstack(rows))
