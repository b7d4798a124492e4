"""Command-line entry point: ``sepsim <experiment> [flags]``."""

from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, ConfigError, build_config, default_threads, load_file

_HELP = {
    "spin-entropy": "steady and time-dependent single-spin entropy vs the closed form",
    "cluster-mass": "largest-cluster fraction vs the giant-component mass",
    "cluster-distribution": "finite-cluster size distribution and power-law fit",
    "susceptibility": "second moment of finite clusters (chi) over g and N",
    "entangling-power": "mutual-information boost after measuring the other spins",
    "collapse": "finite-size-scaling collapse of a dataset CSV",
    "iqp-return-prob": "return probability: brute force vs the tree formula",
    "selftest": "fast internal consistency checks",
}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML file of flat key = value settings")
    common.add_argument("--g", help="g value or comma list")
    common.add_argument("--g-grid", dest="g_grid", help="g grid, start:stop:step (inclusive) or comma list")
    common.add_argument("--sizes", help="comma list of system sizes N")
    common.add_argument("--traj", type=int, help="trajectories per (g, N) point")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--threads", type=int, help="worker threads (default: $SEPSIM_THREADS or 1)")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--mode", choices=["clifford", "iqp", "idealized-graph"])
    common.add_argument("--burn-in", dest="burn_in", type=int, help="burn-in timesteps (default: about 12 measurements per spin)")
    common.add_argument("--times", help="mt values (measurement events per spin) to snapshot, comma list or grid")
    common.add_argument("--angle-dist", dest="angle_dist", choices=["fixed-pi", "uniform"])
    common.add_argument("--ordering", choices=["gates-first", "interleaved"])
    common.add_argument("--basis", help="measurement basis for entangling power: X, Y, Z or random")
    common.add_argument("--input", help="dataset CSV (collapse)")
    common.add_argument("--column", help="observable column of the dataset (collapse)")
    common.add_argument("--exponents", help="a,b for x = N^a |g - g_c|, y' = N^b y (collapse)")
    common.add_argument("--grid", help="candidate exponent pairs a:b,a:b,... (collapse)")
    common.add_argument("--gnuplot", action="store_true", default=None, help="also write gnuplot scripts")

    p = argparse.ArgumentParser(prog="sepsim", description="Measurement-driven separability transition experiments.")
    sub = p.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common], help=_HELP[name], description=_HELP[name])
    return p


def _overrides(ns) -> dict:
    ov = {}
    for key in ("g", "g_grid", "sizes", "traj", "seed", "threads", "out", "mode", "burn_in", "times",
                "angle_dist", "ordering", "basis", "input", "column", "exponents", "grid", "gnuplot"):
        val = getattr(ns, key, None)
        if val is not None:
            ov[key] = val
    if "g" in ov and "g_grid" in ov:
        raise ConfigError("command line: use either --g or --g-grid, not both")
    return ov


def main(argv=None) -> int:
    ns = _parser().parse_args(argv)
    try:
        file_values, file_lines = ({}, {})
        if ns.config:
            file_values, file_lines = load_file(ns.config)
        ov = _overrides(ns)
        if "threads" not in ov and "threads" not in file_values:
            ov["threads"] = default_threads()
        cfg = build_config(ns.experiment, file_values, file_lines, ov, source=ns.config or "<config>")
    except ConfigError as exc:
        print(f"sepsim: config error: {exc}", file=sys.stderr)
        return 2

    from .experiments import run_experiment

    try:
        result, manifest = run_experiment(cfg)
    except (ValueError, OSError) as exc:
        print(f"sepsim: {ns.experiment} failed: {exc}", file=sys.stderr)
        return 1
    for name in sorted(manifest["files"]):
        print(f"wrote {cfg.out}/{name}")
    if cfg.experiment == "selftest":
        for row in result.tables["selftest.csv"].rows:
            print(f"{'PASS' if row[1] else 'FAIL'}  {row[0]}: {row[2]}")
    return 0 if result.ok else 1


if __name__ == "__main__":
    sys.exit(main())
