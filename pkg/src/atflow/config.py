"""Flat ``key = value`` run configuration.

One key per line, ``#`` starts a comment, unknown keys are rejected.  Every
range is checked in :func:`parse_config`, before any computation starts.

=================  ==========  ==============================================
key                default     meaning
=================  ==========  ==============================================
nx, ny             required    node counts (>= 2)
lx, ly             1.0         domain extents
epsilon            required    phase-field length scale (> 0)
eta                1e-3        residual stiffness, in (0, 1)
p                  4.0         surface growth exponent (> 2)
beta               1.0         fidelity weight (>= 0)
g_path             --          datum file (csv or pgm); relative to the config
g_format           from ext.   csv | pgm
g_synthetic        --          two_phase | disk | step_edge | constant
g_noise            0.0         Gaussian noise std added to a synthetic datum
g_value            0.0         level of the ``constant`` datum
u0                 copy-g      copy-g | smooth-g | <path>
u0_format          from ext.   csv | pgm (when u0 is a path)
u0_smoothing       0.02        Gaussian std (length units) for smooth-g
scheme             alternate   alternate | global
delta              1e-3        first (or uniform) time step
steps              10          number of steps
delta_growth       1.0         geometric factor, delta_i = delta * growth^(i-1)
delta_list         --          explicit comma-separated steps (overrides above)
ratio_bound        2.0         bound on delta_(i+1) / delta_i
cg_tol             1e-10       u-step relative residual
cg_max_iter        0           0 means 10 * nx * ny
pg_tol             0           0 means 1e-8 * sqrt(lx * ly)
pg_max_iter        20000       rho-step iteration cap
tol_alt            1e-10       relative sweep decrease for scheme=global
max_sweeps         200         sweep cap for scheme=global
snapshot_steps     --          comma-separated step indices (0 = initial)
snapshot_format    csv         csv | pgm | both
delta1, delta2     0.1, 0.9    slicing interval
n_thresholds       33          levels scanned in (delta1, delta2)
rho_cut            0.5         intact-region cut for the MS energy estimate
output_dir         out         relative to the config file
seed               0           noise seed
plots              true        render PNG figures next to the CSV output
sweep_regrid       false       sweeps pick h = epsilon / 4 per epsilon
sweep_workers      1           parallel processes for sweeps
=================  ==========  ==============================================
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import synthetic
from .energy import ParameterError, Params, make_params
from .fieldio import FieldFormatError, infer_format, load_field
from .flow import SCHEMES, TimePartition, Tolerances, validate_partition
from .grid import Grid, GridError

REQUIRED = object()


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text: str) -> tuple:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _opt_str(text: str):
    return text.strip() or None


SCHEMA = {
    "nx": (int, REQUIRED), "ny": (int, REQUIRED), "lx": (float, 1.0), "ly": (float, 1.0),
    "epsilon": (float, REQUIRED), "eta": (float, 1e-3), "p": (float, 4.0), "beta": (float, 1.0),
    "g_path": (_opt_str, None), "g_format": (_opt_str, None), "g_synthetic": (_opt_str, None),
    "g_noise": (float, 0.0), "g_value": (float, 0.0),
    "u0": (str, "copy-g"), "u0_format": (_opt_str, None), "u0_smoothing": (float, 0.02),
    "scheme": (str, "alternate"),
    "delta": (float, 1e-3), "steps": (int, 10), "delta_growth": (float, 1.0),
    "delta_list": (_floats, None), "ratio_bound": (float, 2.0),
    "cg_tol": (float, 1e-10), "cg_max_iter": (int, 0), "pg_tol": (float, 0.0),
    "pg_max_iter": (int, 20000), "tol_alt": (float, 1e-10), "max_sweeps": (int, 200),
    "snapshot_steps": (_ints, ()), "snapshot_format": (str, "csv"),
    "delta1": (float, 0.1), "delta2": (float, 0.9), "n_thresholds": (int, 33), "rho_cut": (float, 0.5),
    "output_dir": (str, "out"), "seed": (int, 0), "plots": (_bool, True),
    "sweep_regrid": (_bool, False), "sweep_workers": (int, 1),
}


@dataclass(frozen=True)
class Setup:
    grid: Grid
    params: Params
    u0: np.ndarray
    partition: TimePartition
    tolerances: Tolerances


@dataclass(frozen=True)
class RunConfig:
    nx: int
    ny: int
    epsilon: float
    lx: float = 1.0
    ly: float = 1.0
    eta: float = 1e-3
    p: float = 4.0
    beta: float = 1.0
    g_path: str | None = None
    g_format: str | None = None
    g_synthetic: str | None = None
    g_noise: float = 0.0
    g_value: float = 0.0
    u0: str = "copy-g"
    u0_format: str | None = None
    u0_smoothing: float = 0.02
    scheme: str = "alternate"
    delta: float = 1e-3
    steps: int = 10
    delta_growth: float = 1.0
    delta_list: tuple | None = None
    ratio_bound: float = 2.0
    cg_tol: float = 1e-10
    cg_max_iter: int = 0
    pg_tol: float = 0.0
    pg_max_iter: int = 20000
    tol_alt: float = 1e-10
    max_sweeps: int = 200
    snapshot_steps: tuple = ()
    snapshot_format: str = "csv"
    delta1: float = 0.1
    delta2: float = 0.9
    n_thresholds: int = 33
    rho_cut: float = 0.5
    output_dir: str = "out"
    seed: int = 0
    plots: bool = True
    sweep_regrid: bool = False
    sweep_workers: int = 1
    base_dir: str = field(default=".", compare=False)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    @property
    def grid(self) -> Grid:
        return Grid(self.nx, self.ny, self.lx, self.ly)

    def partition(self) -> TimePartition:
        if self.delta_list:
            return TimePartition(self.delta_list, self.ratio_bound)
        return TimePartition(tuple(self.delta * self.delta_growth ** i for i in range(self.steps)),
                             self.ratio_bound)

    def tolerances(self) -> Tolerances:
        return Tolerances(cg_tol=self.cg_tol, cg_max_iter=self.cg_max_iter or None,
                          pg_tol=self.pg_tol or None, pg_max_iter=self.pg_max_iter,
                          tol_alt=self.tol_alt, max_sweeps=self.max_sweeps)

    def datum(self, grid: Grid) -> np.ndarray:
        if self.g_synthetic:
            return synthetic.make_datum(self.g_synthetic, grid, self.g_noise, self.seed, self.g_value)
        return load_field(self.resolve(self.g_path), self.g_format, grid)

    def initial_u(self, grid: Grid, g: np.ndarray) -> np.ndarray:
        if self.u0 == "copy-g":
            return g.copy()
        if self.u0 == "smooth-g":
            return synthetic.smooth(g, grid, self.u0_smoothing)
        return load_field(self.resolve(self.u0), self.u0_format, grid)

    def build(self) -> Setup:
        grid = self.grid
        g = self.datum(grid)
        params = make_params(self.epsilon, self.eta, self.p, self.beta, g, grid)
        return Setup(grid, params, self.initial_u(grid, g), self.partition(), self.tolerances())

    def as_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.name != "base_dir"}
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}


def _check(cfg: RunConfig) -> None:
    def fail(key, msg):
        raise ConfigError(key, msg)

    for key in ("nx", "ny"):
        if getattr(cfg, key) < 2:
            fail(key, "must be >= 2")
    for key in ("lx", "ly"):
        v = getattr(cfg, key)
        if not (math.isfinite(v) and v > 0):
            fail(key, "must be finite and > 0")
    try:
        Grid(cfg.nx, cfg.ny, cfg.lx, cfg.ly)
    except GridError as exc:
        fail("nx", str(exc))
    try:
        make_params(cfg.epsilon, cfg.eta, cfg.p, cfg.beta, np.zeros((2, 2)), Grid(2, 2))
    except ParameterError as exc:
        fail(str(exc).split()[0], str(exc))

    if bool(cfg.g_path) == bool(cfg.g_synthetic):
        fail("g_path", "exactly one of g_path or g_synthetic is required")
    if cfg.g_synthetic and cfg.g_synthetic not in synthetic.KINDS:
        fail("g_synthetic", f"must be one of {synthetic.KINDS}")
    if cfg.g_path:
        try:
            fmt_ = cfg.g_format or infer_format(cfg.g_path)
        except FieldFormatError as exc:
            fail("g_format", str(exc))
        if fmt_ not in ("csv", "pgm"):
            fail("g_format", "must be csv or pgm")
        if not cfg.resolve(cfg.g_path).is_file():
            fail("g_path", f"file not found: {cfg.resolve(cfg.g_path)}")
    if cfg.g_noise < 0:
        fail("g_noise", "must be >= 0")
    if cfg.u0 not in ("copy-g", "smooth-g"):
        if not cfg.resolve(cfg.u0).is_file():
            fail("u0", f"expected copy-g, smooth-g or an existing file (got {cfg.u0!r})")
        if cfg.u0_format not in (None, "csv", "pgm"):
            fail("u0_format", "must be csv or pgm")
    if cfg.u0_smoothing < 0:
        fail("u0_smoothing", "must be >= 0")
    if cfg.scheme not in SCHEMES:
        fail("scheme", f"must be one of {SCHEMES}")

    if cfg.delta_list is None:
        if not cfg.delta > 0:
            fail("delta", "must be > 0")
        if cfg.steps < 0:
            fail("steps", "must be >= 0")
        if not cfg.delta_growth > 0:
            fail("delta_growth", "must be > 0")
    if not cfg.ratio_bound >= 1.0:
        fail("ratio_bound", "must be >= 1")
    violations = validate_partition(cfg.partition())
    if violations:
        v = violations[0]
        key = "delta_list" if cfg.delta_list else ("delta" if v.kind == "positivity" else "delta_growth")
        fail(key, f"partition violates {v.kind} at index {v.index} (value {v.value:g})")

    for key in ("cg_tol", "tol_alt"):
        if not getattr(cfg, key) > 0:
            fail(key, "must be > 0")
    for key in ("pg_tol", "cg_max_iter"):
        if getattr(cfg, key) < 0:
            fail(key, "must be >= 0 (0 selects the default)")
    for key in ("pg_max_iter", "max_sweeps", "n_thresholds", "sweep_workers"):
        if getattr(cfg, key) < 1:
            fail(key, "must be >= 1")
    if any(s < 0 for s in cfg.snapshot_steps):
        fail("snapshot_steps", "step indices must be >= 0")
    if cfg.snapshot_format not in ("csv", "pgm", "both"):
        fail("snapshot_format", "must be csv, pgm or both")
    if not 0.0 < cfg.delta1 < 1.0:
        fail("delta1", "must lie in (0, 1)")
    if not cfg.delta1 < cfg.delta2 < 1.0:
        fail("delta2", "must lie in (delta1, 1)")
    if not 0.0 < cfg.rho_cut < 1.0:
        fail("rho_cut", "must lie in (0, 1)")


def parse_config(text: str, base_dir: str | Path = ".") -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(key, "unknown key")
        if key in values:
            raise ConfigError(key, "duplicate key")
        conv = SCHEMA[key][0]
        try:
            values[key] = conv(value)
        except ValueError as exc:
            raise ConfigError(key, f"bad value {value!r} ({exc})") from None
    for key, (_, default) in SCHEMA.items():
        if default is REQUIRED and key not in values:
            raise ConfigError(key, "missing required key")
    cfg = RunConfig(base_dir=str(base_dir), **values)
    _check(cfg)
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent)
