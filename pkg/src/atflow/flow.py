"""Minimizing-movement time loop for the unilateral Ambrosio-Tortorelli flow.

Two step variants are provided:

``step_alternate``
    one u-solve with the previous phase field, then one obstacle solve for
    rho <= rho_prev.
``step_global``
    the same two blocks repeated until the sweep decrease of
    E(u, rho) + ||u - u_prev||^2 / (2 delta) stalls.  The obstacle is always
    the previous time level, never the inner iterate.

Every block move is a descent step, so both variants satisfy the one-step
energy inequality and therefore the cumulative Lyapunov bound.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .audit import AuditReport, audit_step, slope
from .energy import EnergyBreakdown, Params, total_energy
from .rho_step import init_rho, solve_rho_step
from .u_step import SolverError, solve_u_step

logger = logging.getLogger(__name__)

SCHEMES = ("alternate", "global")
RATIO_RTOL = 1e-12


@dataclass(frozen=True)
class TimePartition:
    deltas: tuple
    ratio_bound: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))

    @classmethod
    def uniform(cls, delta: float, steps: int, ratio_bound: float = 2.0) -> "TimePartition":
        return cls((float(delta),) * int(steps), ratio_bound)

    @classmethod
    def geometric(cls, delta: float, growth: float, steps: int,
                  ratio_bound: float | None = None) -> "TimePartition":
        deltas = tuple(float(delta) * float(growth) ** i for i in range(int(steps)))
        return cls(deltas, max(1.0, growth) if ratio_bound is None else ratio_bound)

    @property
    def times(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.deltas)])

    def __len__(self):
        return len(self.deltas)


@dataclass(frozen=True)
class PartitionViolation:
    index: int
    kind: str  # "positivity" | "ratio"
    value: float


def validate_partition(partition: TimePartition) -> list[PartitionViolation]:
    """Every index violating delta > 0 or delta[i+1]/delta[i] <= ratio_bound (empty if ok)."""
    out = []
    if not partition.ratio_bound >= 1.0:
        out.append(PartitionViolation(-1, "ratio_bound", float(partition.ratio_bound)))
    d = partition.deltas
    for i, di in enumerate(d):
        if not (np.isfinite(di) and di > 0):
            out.append(PartitionViolation(i, "positivity", di))
    for i in range(len(d) - 1):
        if d[i] > 0 and d[i + 1] > 0:
            ratio = d[i + 1] / d[i]
            if ratio > partition.ratio_bound * (1.0 + RATIO_RTOL):
                out.append(PartitionViolation(i + 1, "ratio", ratio))
    return out


@dataclass(frozen=True)
class Tolerances:
    cg_tol: float = 1e-10
    cg_max_iter: int | None = None
    pg_tol: float | None = None
    pg_max_iter: int = 20000
    tol_alt: float = 1e-10
    max_sweeps: int = 200


@dataclass(frozen=True)
class FlowState:
    step: int
    t: float
    u: np.ndarray
    rho: np.ndarray


@dataclass(frozen=True)
class StepRecord:
    step: int
    t: float
    delta: float
    energy: EnergyBreakdown
    velocity_norm: float
    slope: float
    inner_iterations: int
    sweeps: int
    audit: AuditReport
    dissipation: float  # cumulative sum of ||u^i - u^{i-1}||^2 / (2 delta^i)


@dataclass
class Trace:
    params: Params
    partition: TimePartition
    scheme: str
    initial_energy: EnergyBreakdown
    records: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)  # step -> (u, rho)
    final_state: FlowState | None = None

    def lyapunov_slack(self) -> np.ndarray:
        """E(u^0, rho^0) - E(u^j, rho^j) - cumulative dissipation, per step j."""
        e0 = self.initial_energy.total
        return np.array([e0 - r.energy.total - r.dissipation for r in self.records])


class FlowError(RuntimeError):
    """A step failed; ``trace`` holds every record completed before the failure."""

    def __init__(self, message: str, trace: Trace):
        super().__init__(message)
        self.trace = trace


def _prox(u, u_prev, delta, params):
    du = u - u_prev
    return params.grid.mass_inner(du, du) / (2.0 * delta)


def _finish(state, u, rho, delta, params, iters, sweeps, dissipation_before):
    nxt = FlowState(state.step + 1, state.t + delta, u, rho)
    energy = total_energy(u, rho, params)
    du = u - state.u
    vel = params.grid.mass_norm(du) / delta
    record = StepRecord(
        step=nxt.step, t=nxt.t, delta=delta, energy=energy, velocity_norm=vel,
        slope=slope(u, rho, params), inner_iterations=iters, sweeps=sweeps,
        audit=audit_step(state, nxt, delta, params),
        dissipation=dissipation_before + _prox(u, state.u, delta, params))
    return nxt, record


def step_alternate(state: FlowState, delta: float, params: Params, tols: Tolerances = Tolerances(),
                   dissipation: float = 0.0):
    u, rep_u = solve_u_step(state.u, state.rho, delta, params, tols.cg_tol, tols.cg_max_iter)
    rho, rep_r = solve_rho_step(u, state.rho, params, tols.pg_tol, tols.pg_max_iter)
    return _finish(state, u, rho, delta, params, rep_u.iterations + rep_r.iterations, 1, dissipation)


def step_global(state: FlowState, delta: float, params: Params, tols: Tolerances = Tolerances(),
                dissipation: float = 0.0):
    u, rho = state.u, state.rho
    last = total_energy(u, rho, params).total
    iters = 0
    for sweep in range(1, tols.max_sweeps + 1):
        u, rep_u = solve_u_step(state.u, rho, delta, params, tols.cg_tol, tols.cg_max_iter, u_start=u)
        rho, rep_r = solve_rho_step(u, state.rho, params, tols.pg_tol, tols.pg_max_iter, rho_start=rho)
        iters += rep_u.iterations + rep_r.iterations
        value = total_energy(u, rho, params).total + _prox(u, state.u, delta, params)
        if last - value <= tols.tol_alt * max(abs(value), np.finfo(float).tiny):
            break
        last = value
    return _finish(state, u, rho, delta, params, iters, sweep, dissipation)


STEPPERS = {"alternate": step_alternate, "global": step_global}


def simulate(params: Params, u0, partition: TimePartition, scheme: str = "alternate",
             tols: Tolerances = Tolerances(), snapshot_steps=(), rho0=None) -> Trace:
    """Run the flow from ``u0`` (and the minimizing initial phase field unless ``rho0`` is given)."""
    if scheme not in STEPPERS:
        raise ValueError(f"scheme must be one of {SCHEMES} (got {scheme!r})")
    violations = validate_partition(partition)
    if violations:
        raise ValueError(f"invalid time partition: {violations[:5]}")
    grid = params.grid
    u0 = grid.check_field(u0, "u0").copy()
    if rho0 is None:
        rho0 = init_rho(u0, params, tols.pg_tol, tols.pg_max_iter)
    rho0 = grid.check_phase(rho0, "rho0")
    state = FlowState(0, 0.0, u0, rho0)
    trace = Trace(params, partition, scheme, total_energy(u0, rho0, params))
    snapshot_steps = set(snapshot_steps)
    if 0 in snapshot_steps:
        trace.snapshots[0] = (u0.copy(), rho0.copy())
    step = STEPPERS[scheme]
    dissipation = 0.0
    for delta in partition.deltas:
        try:
            state, record = step(state, delta, params, tols, dissipation)
        except SolverError as exc:
            trace.final_state = state
            raise FlowError(f"step {state.step + 1} failed: {exc}", trace) from exc
        dissipation = record.dissipation
        trace.records.append(record)
        if not record.audit.ok:
            logger.warning("step %d audit failures: %s", record.step, record.audit.failures())
        if state.step in snapshot_steps:
            trace.snapshots[state.step] = (state.u.copy(), state.rho.copy())
    trace.final_state = state
    return trace


def run_flow(config) -> Trace:
    """Build grid, data and partition from a validated run configuration and simulate."""
    setup = config.build()
    return simulate(setup.params, setup.u0, setup.partition, config.scheme, setup.tolerances,
                    config.snapshot_steps)
