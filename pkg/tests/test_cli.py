import json

import numpy as np
import pytest

from atflow.cli import main
from atflow.fieldio import read_csv_grid, read_pgm

CFG = """
nx = 16
ny = 16
epsilon = 0.25
beta = 50
g_synthetic = two_phase
g_noise = 0.05
steps = 4
snapshot_steps = 0, 4
output_dir = out
"""


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(CFG)
    return p


def test_validate(cfg_path, capsys):
    assert main(["validate", str(cfg_path)]) == 0
    assert "ok" in capsys.readouterr().out


def test_validate_bad_key(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text(CFG.replace("epsilon = 0.25", "epsilon = -1"))
    assert main(["validate", str(p)]) == 1
    assert "epsilon" in capsys.readouterr().err


def test_missing_config(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "nope.cfg")]) == 1
    assert "error" in capsys.readouterr().err


def test_run_writes_outputs(cfg_path, tmp_path):
    assert main(["run", str(cfg_path)]) == 0
    out = tmp_path / "out"
    rows = (out / "energies.csv").read_text().splitlines()
    assert len(rows) == 5 and rows[0].startswith("step,t,delta")
    for name in ("audits.csv", "u_00000.csv", "rho_00004.csv", "energies.png", "final_fields.png"):
        assert (out / name).is_file(), name
    meta = json.loads((out / "run_meta.json").read_text())
    assert meta["config"]["nx"] == 16 and meta["steps_completed"] == 4


def test_run_no_plots_override_dir(cfg_path, tmp_path):
    target = tmp_path / "elsewhere"
    assert main(["run", str(cfg_path), "-o", str(target), "--no-plots"]) == 0
    assert (target / "energies.csv").is_file()
    assert not list(target.glob("*.png"))


def test_run_failure_writes_partial(tmp_path, capsys):
    p = tmp_path / "fail.cfg"
    p.write_text(CFG + "cg_max_iter = 1\n")
    assert main(["run", str(p), "--no-plots"]) == 1
    assert "partial trace" in capsys.readouterr().err
    assert (tmp_path / "out" / "energies.csv").read_text().count("\n") == 1


def test_initial_phase_failure_reported(tmp_path, capsys):
    p = tmp_path / "fail.cfg"
    p.write_text(CFG + "pg_max_iter = 1\n")
    assert main(["run", str(p), "--no-plots"]) == 1
    assert "projected gradient" in capsys.readouterr().err


def test_sweep(cfg_path, tmp_path):
    assert main(["sweep", str(cfg_path), "--eps", "0.5,0.3", "-o", str(tmp_path / "sw")]) == 0
    sw = tmp_path / "sw"
    assert len((sw / "sweep_report.csv").read_text().splitlines()) == 3
    assert (sw / "sweep.png").is_file()
    assert (sw / "eps_0.5" / "energies.csv").is_file() and (sw / "eps_0.3" / "energies.png").is_file()


def test_sweep_rejects_unresolved(cfg_path, capsys):
    assert main(["sweep", str(cfg_path), "--eps", "0.3,0.1"]) == 1
    assert "epsilon=0.1" in capsys.readouterr().err


@pytest.mark.parametrize("fmt", ["csv", "pgm"])
def test_synth(tmp_path, fmt):
    out = tmp_path / f"g.{fmt}"
    assert main(["synth", "disk", str(out), "--nx", "9", "--ny", "7"]) == 0
    arr = read_csv_grid(out) if fmt == "csv" else read_pgm(out)
    assert arr.shape == (7, 9)
    assert set(np.unique(arr)) == {0.0, 1.0}
