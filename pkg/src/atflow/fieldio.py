"""Reading and writing nodal fields and run traces.

CSV grids: ``ny`` lines of ``nx`` comma-separated reals, no header; line ``j``
holds the nodes at ``y = j * hy``.  PGM images (P2 or P5) are stored top row
first, i.e. line 0 is ``y = ly``; pixel values are scaled to [0, 1] by maxval.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .grid import Grid

ENERGY_HEADER = "step,t,delta,total,bulk,surface,fidelity,velocity_norm,slope,inner_iters,audit_ok"
AUDIT_HEADER = ("step,rho_increase,max_principle_excess,energy_slack,surface_slack,bulk_slack,"
                "lyapunov_slack")


class FieldFormatError(ValueError):
    pass


def fmt(x: float) -> str:
    return "%.17g" % x


def infer_format(path) -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix not in ("csv", "pgm"):
        raise FieldFormatError(f"cannot infer field format from {path}; use .csv or .pgm")
    return suffix


def _pgm_tokens(data: bytes, count: int, start: int):
    """Read ``count`` whitespace-separated header tokens, skipping # comments."""
    tokens, i = [], start
    while len(tokens) < count:
        while i < len(data) and data[i:i + 1].isspace():
            i += 1
        if i >= len(data):
            raise FieldFormatError("truncated PGM header")
        if data[i:i + 1] == b"#":
            while i < len(data) and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < len(data) and not data[j:j + 1].isspace():
            j += 1
        tokens.append(data[i:j])
        i = j
    return tokens, i


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise FieldFormatError(f"{path}: not a P2/P5 PGM file")
    try:
        (w, h, maxval), pos = _pgm_tokens(data, 3, 2)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise FieldFormatError(f"{path}: malformed PGM header") from exc
    if not (0 < maxval < 65536):
        raise FieldFormatError(f"{path}: maxval {maxval} out of range")
    if magic == b"P2":
        try:
            vals = np.array([int(t) for t in data[pos:].split() if not t.startswith(b"#")], dtype=float)
        except ValueError as exc:
            raise FieldFormatError(f"{path}: non-integer pixel") from exc
        if vals.size != w * h:
            raise FieldFormatError(f"{path}: expected {w * h} pixels, found {vals.size}")
    else:
        pos += 1  # single whitespace after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        raw = data[pos:pos + w * h * dtype.itemsize]
        vals = np.frombuffer(raw, dtype=dtype).astype(float)
        if vals.size != w * h:
            raise FieldFormatError(f"{path}: truncated pixel data")
    if vals.max(initial=0) > maxval:
        raise FieldFormatError(f"{path}: pixel exceeds maxval")
    return vals.reshape(h, w)[::-1] / maxval


def write_pgm(field: np.ndarray, path) -> None:
    img = np.clip(np.rint(np.clip(field, 0.0, 1.0) * 255), 0, 255).astype(np.uint8)[::-1]
    h, w = img.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + img.tobytes())


def read_csv_grid(path) -> np.ndarray:
    rows = []
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError as exc:
            raise FieldFormatError(f"{path}:{n}: {exc}") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise FieldFormatError(f"{path}: ragged or empty CSV grid")
    return np.array(rows)


def load_field(path, fmt_: str | None, grid: Grid) -> np.ndarray:
    path = Path(path)
    fmt_ = fmt_ or infer_format(path)
    if fmt_ == "csv":
        arr = read_csv_grid(path)
    elif fmt_ == "pgm":
        arr = read_pgm(path)
    else:
        raise FieldFormatError(f"unknown field format {fmt_!r}")
    if arr.shape != grid.shape:
        raise FieldFormatError(f"{path}: dimensions {arr.shape[1]}x{arr.shape[0]} "
                               f"do not match grid {grid.nx}x{grid.ny}")
    if not np.all(np.isfinite(arr)):
        raise FieldFormatError(f"{path}: non-finite values")
    return arr


def write_snapshot(field: np.ndarray, path, fmt_: str = "csv") -> None:
    path = Path(path)
    if fmt_ == "csv":
        path.write_text("".join(",".join(fmt(v) for v in row) + "\n" for row in field))
    elif fmt_ == "pgm":
        write_pgm(field, path)
    else:
        raise FieldFormatError(f"unknown field format {fmt_!r}")


def energy_rows(trace) -> list[str]:
    lines = [ENERGY_HEADER]
    for r in trace.records:
        e = r.energy
        lines.append(",".join([str(r.step), fmt(r.t), fmt(r.delta), fmt(e.total), fmt(e.bulk),
                               fmt(e.surface), fmt(e.fidelity), fmt(r.velocity_norm), fmt(r.slope),
                               str(r.inner_iterations), "1" if r.audit.ok else "0"]))
    return lines


def write_trace(trace, directory, meta: dict | None = None, snapshot_format: str = "csv") -> Path:
    """Write energies.csv, audits.csv, snapshots and run_meta.json into ``directory``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    (out / "energies.csv").write_text("\n".join(energy_rows(trace)) + "\n")
    lyap = trace.lyapunov_slack() if trace.records else []
    audit_lines = [AUDIT_HEADER]
    for r, ls in zip(trace.records, lyap):
        a = r.audit
        audit_lines.append(",".join([str(r.step), fmt(a.rho_monotone.value), fmt(a.max_principle.value),
                                     fmt(a.energy_inequality.value), fmt(a.surface_monotone.value),
                                     fmt(a.bulk_monotone.value), fmt(ls)]))
    (out / "audits.csv").write_text("\n".join(audit_lines) + "\n")
    formats = ("csv", "pgm") if snapshot_format == "both" else (snapshot_format,)
    for step, (u, rho) in sorted(trace.snapshots.items()):
        for f in formats:
            write_snapshot(u, out / f"u_{step:05d}.{f}", f)
            write_snapshot(rho, out / f"rho_{step:05d}.{f}", f)
    if meta is not None:
        (out / "run_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return out
