"""Epsilon sweeps: crack-length and Mumford-Shah estimates as epsilon decreases."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .crack import extract_crack
from .energy import ms_energy_estimate
from .flow import Trace, simulate

H_PER_EPS = 4  # the grid must satisfy h <= epsilon / 4
LIMIT_SLACK = 0.10


class ResolutionError(ValueError):
    pass


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    nx: int
    ny: int
    h: float
    final_time: float
    diffuse_length: float
    sliced_length: float
    perimeter: float
    threshold: float
    ms_energy: float
    initial_total: float
    final_total: float
    dissipation: float  # sum_i delta_i * velocity_i^2, the discrete int ||u'||^2
    limit_lhs: float
    limit_rhs: float

    @property
    def limit_ok(self) -> bool:
        return self.limit_lhs <= (1.0 + LIMIT_SLACK) * self.limit_rhs


@dataclass
class SweepReport:
    rows: list
    rho_cut: float
    traces: dict = field(default_factory=dict, repr=False)

    COLUMNS = ("epsilon", "nx", "ny", "h", "final_time", "diffuse_length", "sliced_length",
               "perimeter", "threshold", "ms_energy", "initial_total", "final_total",
               "dissipation", "limit_lhs", "limit_rhs", "limit_ok")

    def to_csv(self) -> str:
        lines = [",".join(self.COLUMNS)]
        for r in self.rows:
            vals = []
            for c in self.COLUMNS:
                v = getattr(r, c)
                vals.append(str(int(v)) if isinstance(v, (bool, int, np.integer)) else "%.17g" % v)
            lines.append(",".join(vals))
        return "\n".join(lines) + "\n"


def grid_for(config, epsilon: float):
    """Per-epsilon grid: h = epsilon / 4 when regridding, else the base grid (checked)."""
    if config.sweep_regrid:
        h = epsilon / H_PER_EPS
        nx = int(math.ceil(config.lx / h - 1e-9)) + 1
        ny = int(math.ceil(config.ly / h - 1e-9)) + 1
        config = config.replace(nx=nx, ny=ny)
    grid = config.grid
    if grid.h > epsilon / H_PER_EPS * (1 + 1e-9):
        raise ResolutionError(f"epsilon={epsilon:g} is under-resolved: h={grid.h:g} > epsilon/4")
    return config


def limit_energy_bound(u0, params) -> float:
    """1/2 int |grad u0|^2 + beta/2 int (u0 - g)^2 on the discrete grid."""
    grid = params.grid
    gx, gy = grid.gradient(u0)
    d = u0 - params.g
    return 0.5 * grid.cell_integral(gx * gx + gy * gy) + 0.5 * params.beta * grid.mass_inner(d, d)


def run_one(config, epsilon: float):
    cfg = grid_for(config, epsilon).replace(epsilon=epsilon)
    setup = cfg.build()
    trace = simulate(setup.params, setup.u0, setup.partition, cfg.scheme, setup.tolerances,
                     cfg.snapshot_steps)
    return summarize(cfg, setup, trace), trace


def summarize(cfg, setup, trace: Trace) -> SweepRow:
    params = setup.params
    state = trace.final_state
    crack = extract_crack(state.rho, params, cfg.delta1, cfg.delta2, cfg.n_thresholds)
    ms = ms_energy_estimate(state.u, state.rho, params, cfg.rho_cut)
    dissipation = float(sum(r.delta * r.velocity_norm ** 2 for r in trace.records))
    final_total = trace.records[-1].energy.total if trace.records else trace.initial_energy.total
    return SweepRow(
        epsilon=cfg.epsilon, nx=cfg.nx, ny=cfg.ny, h=setup.grid.h, final_time=state.t,
        diffuse_length=crack.diffuse_length, sliced_length=crack.sliced_length,
        perimeter=crack.perimeter, threshold=crack.threshold, ms_energy=ms,
        initial_total=trace.initial_energy.total, final_total=final_total,
        dissipation=dissipation, limit_lhs=ms + dissipation,
        limit_rhs=limit_energy_bound(setup.u0, params))


def eps_sweep(base_config, eps_list, workers: int | None = None) -> SweepReport:
    """Run the configured flow for each epsilon (strictly decreasing) and summarize."""
    eps_list = [float(e) for e in eps_list]
    if not eps_list or any(e <= 0 for e in eps_list):
        raise ValueError("eps_list must be non-empty with every epsilon > 0")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError(f"eps_list must be strictly decreasing (got {eps_list})")
    for e in eps_list:  # fail before any compute
        grid_for(base_config, e)
    workers = base_config.sweep_workers if workers is None else workers
    if workers > 1 and len(eps_list) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, [base_config] * len(eps_list), eps_list))
    else:
        results = [run_one(base_config, e) for e in eps_list]
    return SweepReport([r for r, _ in results], base_config.rho_cut,
                       {e: t for e, (_, t) in zip(eps_list, results)})
