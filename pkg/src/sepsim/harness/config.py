"""Experiment configuration: flat TOML file plus command-line overrides."""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
from dataclasses import asdict, dataclass, fields, replace

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..graph_state import MODES

EXPERIMENTS = (
    "spin-entropy",
    "cluster-mass",
    "cluster-distribution",
    "susceptibility",
    "entangling-power",
    "collapse",
    "iqp-return-prob",
    "selftest",
)

DEFAULT_SIZES = {
    "spin-entropy": (1000,),
    "cluster-mass": (250, 500, 1000, 2000),
    "cluster-distribution": (2000,),
    "susceptibility": (250, 500, 1000, 2000),
    "entangling-power": (50, 100, 200, 400),
    "iqp-return-prob": (60,),
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the source line and field."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    g: tuple = ()
    sizes: tuple = ()
    traj: int = 20
    burn_in: int | None = None
    snapshot_cadence: int = 0
    times: tuple = ()
    seed: int = 0
    out: str = "results"
    threads: int = 1
    mode: str = "clifford"
    angle_dist: str | None = None
    ordering: str = "gates-first"
    basis: str = "X"
    max_gamma_u: int = 64
    k_min: int = 4
    # collapse
    input: str | None = None
    column: str | None = None
    exponents: tuple = ()
    grid: tuple = ()
    g_c: float = 2.0 / 3.0
    gnuplot: bool = False

    def resolved_angle_dist(self) -> str:
        if self.angle_dist is not None:
            return self.angle_dist
        return "uniform" if self.mode == "iqp" else "fixed-pi"

    def hash(self) -> str:
        """SHA-256 of the result-determining fields (not out/threads/gnuplot)."""
        d = asdict(self)
        for k in ("out", "threads", "gnuplot"):
            d.pop(k)
        if d["input"] is not None:
            d["input"] = os.path.basename(d["input"])
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    def to_dict(self) -> dict:
        return asdict(self)


_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}
_ALIASES = {"g_grid": "g", "g-grid": "g", "n": "sizes", "trajectories": "traj",
            "master_seed": "seed", "burn_in_timesteps": "burn_in"}


def parse_grid(text: str) -> tuple:
    """'0.2:3.0:0.2' (inclusive) or '0.25,0.5,1' -> tuple of floats."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"grid {text!r} needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(count))
    return tuple(float(p) for p in text.split(",") if p.strip())


def parse_int_list(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    return tuple(int(p) for p in str(text).split(",") if p.strip())


def parse_pairs(text) -> tuple:
    """'0.333:-0.333,0.167:-0.167' -> ((a, b), ...)."""
    if isinstance(text, (list, tuple)):
        return tuple((float(a), float(b)) for a, b in text)
    out = []
    for item in str(text).split(","):
        item = item.strip()
        if not item:
            continue
        a, b = item.split(":")
        out.append((float(a), float(b)))
    return tuple(out)


def _coerce(name: str, value):
    if name == "g":
        if isinstance(value, (list, tuple)):
            return tuple(float(v) for v in value)
        if isinstance(value, (int, float)):
            return (float(value),)
        return parse_grid(value)
    if name == "times":
        if isinstance(value, (list, tuple)):
            return tuple(float(v) for v in value)
        if isinstance(value, (int, float)):
            return (float(value),)
        return parse_grid(value)
    if name == "sizes":
        if isinstance(value, int):
            return (value,)
        return parse_int_list(value)
    if name == "exponents":
        if isinstance(value, str):
            value = [float(v) for v in value.replace(":", ",").split(",")]
        value = tuple(float(v) for v in value)
        if len(value) != 2:
            raise ValueError("exponents need exactly two values (a, b)")
        return value
    if name == "grid":
        return parse_pairs(value)
    if name in ("traj", "seed", "threads", "max_gamma_u", "snapshot_cadence", "k_min"):
        if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
            raise ValueError("must be an integer")
        return int(value)
    if name == "burn_in":
        return None if value in (None, "", "auto") else int(value)
    if name == "g_c":
        return float(value)
    if name == "gnuplot":
        if isinstance(value, str):
            return value.lower() in ("1", "true", "yes")
        return bool(value)
    return None if value is None else str(value)


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    def bad(fld, msg):
        raise ConfigError(f"field '{fld}': {msg}")

    if cfg.experiment not in EXPERIMENTS:
        bad("experiment", f"unknown experiment {cfg.experiment!r}")
    if any(not (v > 0 and math.isfinite(v)) for v in cfg.g):
        bad("g", "all g values must be positive and finite")
    if any(n < 2 for n in cfg.sizes):
        bad("sizes", "system sizes must be at least 2")
    if cfg.traj < 1:
        bad("traj", "must be a positive integer")
    if cfg.burn_in is not None and cfg.burn_in < 1:
        bad("burn_in", "must be a positive integer")
    if cfg.snapshot_cadence < 0:
        bad("snapshot_cadence", "must be non-negative")
    if any(t < 0 for t in cfg.times):
        bad("times", "times must be non-negative")
    if not 0 <= cfg.seed < 2 ** 64:
        bad("seed", "must be a non-negative 64-bit integer")
    if cfg.threads < 1:
        bad("threads", "must be a positive integer")
    if cfg.mode not in MODES:
        bad("mode", f"must be one of {sorted(MODES)}")
    if cfg.angle_dist not in (None, "fixed-pi", "uniform"):
        bad("angle_dist", "must be 'fixed-pi' or 'uniform'")
    if cfg.mode == "clifford" and cfg.resolved_angle_dist() != "fixed-pi":
        bad("angle_dist", "clifford mode needs fixed-pi angles")
    if cfg.ordering not in ("gates-first", "interleaved"):
        bad("ordering", "must be 'gates-first' or 'interleaved'")
    if cfg.basis.upper() not in ("X", "Y", "Z", "RANDOM"):
        bad("basis", "must be X, Y, Z or random")
    if cfg.max_gamma_u < 1:
        bad("max_gamma_u", "must be a positive integer")
    if cfg.k_min < 1:
        bad("k_min", "must be a positive integer")
    if cfg.experiment == "collapse":
        if not cfg.input:
            bad("input", "collapse needs an input dataset CSV")
        if not cfg.exponents and not cfg.grid:
            bad("exponents", "collapse needs exponents or a grid of candidates")
    if cfg.experiment == "entangling-power" and cfg.mode == "iqp":
        bad("mode", "entangling power needs a stabilizer (clifford) state")
    return cfg


def _line_of(text: str, key: str) -> int | None:
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=")
    for i, line in enumerate(text.splitlines(), 1):
        if pat.match(line):
            return i
    return None


def load_file(path: str) -> tuple[dict, dict]:
    """Parse a config file; returns (values, line numbers by key)."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    text = raw.decode("utf-8", errors="replace")
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    lines = {}
    flat = {}
    for key, value in data.items():
        if isinstance(value, dict):
            line = _line_of(text, key) or _line_of(text, f"[{key}]")
            raise ConfigError(f"{path}:{line or '?'}: field '{key}': tables are not supported (flat keys only)")
        flat[key] = value
        lines[key] = _line_of(text, key)
    return flat, lines


def build_config(experiment: str, file_values: dict | None = None, file_lines: dict | None = None,
                 overrides: dict | None = None, source: str = "<config>") -> ExperimentConfig:
    """Merge file values and overrides (overrides win), coerce and validate."""
    values: dict = {}
    origin: dict = {}
    for layer, lines, label in ((file_values or {}, file_lines or {}, source), (overrides or {}, {}, "command line")):
        for key, value in layer.items():
            if value is None:
                continue
            name = _ALIASES.get(key, key).replace("-", "_")
            where = f"{label}:{lines[key]}" if lines.get(key) else label
            if name not in _FIELD_NAMES or name == "experiment":
                raise ConfigError(f"{where}: field '{key}': unknown key")
            try:
                values[name] = _coerce(name, value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{where}: field '{key}': {exc}") from None
            origin[name] = where
    if "sizes" not in values and experiment in DEFAULT_SIZES:
        values["sizes"] = DEFAULT_SIZES[experiment]
    cfg = ExperimentConfig(experiment=experiment, **values)
    try:
        return validate(cfg)
    except ConfigError as exc:
        msg = str(exc)
        m = re.match(r"field '(\w+)'", msg)
        where = origin.get(m.group(1)) if m else None
        raise ConfigError(f"{where}: {msg}" if where else msg) from None


def default_threads() -> int:
    env = os.environ.get("SEPSIM_THREADS")
    if env is None or env.strip() == "":
        return 1
    try:
        val = int(env)
    except ValueError:
        raise ConfigError(f"SEPSIM_THREADS: must be a positive integer, got {env!r}") from None
    if val < 1:
        raise ConfigError(f"SEPSIM_THREADS: must be a positive integer, got {env!r}")
    return val


def with_defaults(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **kw)
