"""Time the compiled and pure-Python kernels on the same workloads.

    python benchmarks/bench_backends.py [--n 1000] [--repeat 3]

Both backends consume identical random streams, so each workload is run on
equal inputs and the results are cross-checked before timings are printed.
"""

import argparse
import time

import numpy as np

from sepsim import _backend
from sepsim.dynamics import DynamicsParams, simulate


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def dynamics(backend, n):
    p = DynamicsParams.from_g(0.7, master_seed=1, burn_in_timesteps=2 * n)
    _, st, _ = simulate(n, p, backend=backend)
    return st.edges()


def rank(backend, n):
    rng = np.random.default_rng(2)
    m = (rng.random((n // 2, n // 2)) < 4.0 / n).astype(np.uint8)
    return _backend.get_backend(backend).gf2_rank(m)


def tableau(backend, n):
    mod = _backend.get_backend(backend)
    k = min(n, 200)
    t = mod.TableauCore(k)
    rng = mod.Rng([5, 6, 7, 8])
    for q in range(k):
        t.h(q)
    for q in range(k - 1):
        t.cz(q, q + 1)
    return [t.measure(q, q % 3, rng) for q in range(k)]


WORKLOADS = {"dynamics": dynamics, "gf2_rank": rank, "tableau": tableau}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000, help="system size")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _backend.COMPILED_AVAILABLE:
        raise SystemExit("compiled core not built; nothing to compare")
    print(f"{'workload':<10} {'compiled_s':>11} {'python_s':>10} {'speedup':>8}")
    for name, fn in WORKLOADS.items():
        tc, rc = best_of(lambda: fn("compiled", args.n), args.repeat)
        tp, rp = best_of(lambda: fn("python", args.n), args.repeat)
        if rc != rp:
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<10} {tc:11.4f} {tp:10.4f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
