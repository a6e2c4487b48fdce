"""Command line entry point: ``atflow run|sweep|validate|synth``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, load_config
from .energy import normalizing_factor
from .fieldio import FieldFormatError, write_snapshot, write_trace
from .flow import FlowError, run_flow
from .grid import Grid
from .sweep import eps_sweep
from .synthetic import KINDS, make_datum
from .u_step import SolverError


def _meta(cfg, extra=None) -> dict:
    meta = {"config": cfg.as_dict(), "version": __version__}
    grid = cfg.grid
    p_prime, alpha = normalizing_factor(cfg.p)
    meta["derived"] = {"hx": grid.hx, "hy": grid.hy, "p_prime": p_prime, "alpha": alpha}
    meta.update(extra or {})
    return meta


def _out_dir(cfg, override):
    return Path(override) if override else cfg.resolve(cfg.output_dir)


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    cfg.build()
    print(f"ok: {args.config}")
    return 0


def _write_run(cfg, trace, out: Path, plots: bool):
    write_trace(trace, out, _meta(cfg, {"scheme": trace.scheme, "steps_completed": len(trace.records)}),
                cfg.snapshot_format)
    if plots:
        from . import plotting

        plotting.energy_figure(trace, out / "energies.png")
        if trace.final_state is not None:
            st = trace.final_state
            plotting.fields_figure(st.u, st.rho, trace.params.grid, out / "final_fields.png",
                                   f"(t={st.t:.4g})")


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(cfg, args.output)
    plots = cfg.plots and not args.no_plots
    try:
        trace = run_flow(cfg)
    except FlowError as exc:
        _write_run(cfg, exc.trace, out, plots)
        print(f"error: {exc} (partial trace written to {out})", file=sys.stderr)
        return 1
    _write_run(cfg, trace, out, plots)
    bad = [r.step for r in trace.records if not r.audit.ok]
    print(f"{len(trace.records)} steps -> {out / 'energies.csv'}"
          + (f"; audit failures at steps {bad[:10]}" if bad else "; all audits passed"))
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    eps = [float(e) for e in args.eps.split(",") if e.strip()]
    out = _out_dir(cfg, args.output)
    plots = cfg.plots and not args.no_plots
    report = eps_sweep(cfg, eps, workers=args.workers)
    out.mkdir(parents=True, exist_ok=True)
    for row in report.rows:
        sub_cfg = cfg.replace(epsilon=row.epsilon, nx=row.nx, ny=row.ny)
        _write_run(sub_cfg, report.traces[row.epsilon], out / f"eps_{row.epsilon:g}", plots)
    (out / "sweep_report.csv").write_text(report.to_csv())
    if plots:
        from . import plotting

        plotting.sweep_figure(report, out / "sweep.png")
    for r in report.rows:
        print(f"eps={r.epsilon:g}: diffuse={r.diffuse_length:.4f} sliced={r.sliced_length:.4f} "
              f"MS={r.ms_energy:.4f} limit_ok={r.limit_ok}")
    return 0


def cmd_synth(args) -> int:
    grid = Grid(args.nx, args.ny, args.lx, args.ly)
    g = make_datum(args.kind, grid, args.noise, args.seed, args.value)
    fmt = args.format or Path(args.out).suffix.lstrip(".") or "csv"
    write_snapshot(g, args.out, fmt)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atflow", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one flow and write energies.csv")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="override output_dir")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run the flow for several epsilon values")
    p.add_argument("config")
    p.add_argument("--eps", required=True, help="comma-separated, strictly decreasing")
    p.add_argument("-o", "--output")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="parse and validate a config without computing")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("synth", help="write a synthetic datum image")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("out")
    p.add_argument("--nx", type=int, default=64)
    p.add_argument("--ny", type=int, default=64)
    p.add_argument("--lx", type=float, default=1.0)
    p.add_argument("--ly", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--value", type=float, default=0.0)
    p.add_argument("--format", choices=("csv", "pgm"))
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FieldFormatError, OSError, ValueError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
