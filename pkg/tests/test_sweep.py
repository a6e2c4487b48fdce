import numpy as np
import pytest

from atflow import eps_sweep
from atflow.config import parse_config
from atflow.sweep import ResolutionError, grid_for

BASE = """
nx = 17
ny = 17
epsilon = 0.3
g_synthetic = {kind}
g_value = 0.4
beta = 100
steps = 3
"""


def test_constant_data_gives_zero_report():
    cfg = parse_config(BASE.format(kind="constant"))
    report = eps_sweep(cfg, [0.5, 0.25])
    assert [r.epsilon for r in report.rows] == [0.5, 0.25]
    for r in report.rows:
        assert r.diffuse_length == r.sliced_length == r.ms_energy == r.dissipation == 0.0
        assert r.limit_ok
    lines = report.to_csv().splitlines()
    assert lines[0].split(",")[0] == "epsilon" and len(lines) == 3


def test_under_resolved_epsilon_named():
    cfg = parse_config(BASE.format(kind="constant"))
    with pytest.raises(ResolutionError, match="epsilon=0.1 "):
        eps_sweep(cfg, [0.5, 0.1])


@pytest.mark.parametrize("eps", [[0.2, 0.2], [0.1, 0.2], [], [0.3, -0.1]])
def test_eps_list_validated(eps):
    cfg = parse_config(BASE.format(kind="constant"))
    with pytest.raises(ValueError):
        eps_sweep(cfg, eps)


def test_regrid_picks_quarter_epsilon():
    cfg = parse_config(BASE.format(kind="constant") + "sweep_regrid = true\nlx = 2\n")
    sub = grid_for(cfg, 0.1)
    assert (sub.nx, sub.ny) == (81, 41)
    assert sub.grid.h <= 0.025 + 1e-15


def test_parallel_matches_serial():
    cfg = parse_config(BASE.format(kind="disk"))
    serial = eps_sweep(cfg, [0.5, 0.3], workers=1)
    parallel = eps_sweep(cfg, [0.5, 0.3], workers=2)
    assert serial.to_csv() == parallel.to_csv()
    assert all(r.diffuse_length > 0 and r.limit_ok for r in serial.rows)
    assert np.isfinite([r.ms_energy for r in serial.rows]).all()
