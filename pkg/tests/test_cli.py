from __future__ import annotations

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from sectorwave import closedform
from sectorwave.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _write(path: Path, data: dict) -> Path:
    path.write_text(json.dumps(data))
    return path


def _gkdv(tmp_path, **solver) -> Path:
    data = json.loads((CONFIGS / "gkdv_l1_V2.json").read_text())
    data["problem"]["solver"].update(solver)
    return _write(tmp_path / "cfg.json", data)


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    out = tmp_path_factory.mktemp("solve")
    assert main(["solve", "--config", str(CONFIGS / "gkdv_l1_V2.json"), "--out", str(out)]) == 0
    return out


def test_solve_writes_outputs(solved):
    report = json.loads((solved / "report.json").read_text())
    assert report["converged"] is True
    assert report["status"] == "converged"
    assert report["final_residual"] <= 1e-10
    assert report["amplitude_at_origin"] == pytest.approx(3.0, rel=1e-9)
    assert (solved / "solution.csv").exists()


def test_solve_is_byte_deterministic(solved, tmp_path):
    assert main(["solve", "--config", str(CONFIGS / "gkdv_l1_V2.json"), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "report.json").read_bytes() == (solved / "report.json").read_bytes()
    assert (tmp_path / "solution.csv").read_bytes() == (solved / "solution.csv").read_bytes()


def test_diagnose_sech2(solved, tmp_path, capsys):
    assert main(["diagnose", str(solved / "solution.csv"), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "diagnostics.json").read_text())
    assert rep["decay"]["c"] == pytest.approx(1.0, rel=0.01)
    assert rep["strip_width"] == pytest.approx(3.14159, rel=0.01)
    assert rep["sector"]["epsilon_star"] == 1.0
    assert rep["sector_containment"] is True
    assert rep["undecided"] == {}
    header = (tmp_path / "ledger.csv").read_text().splitlines()[0]
    assert header == "alpha,beta,value,noise,trusted"
    # a second run reproduces the report byte for byte
    again = tmp_path / "again"
    assert main(["diagnose", str(solved / "solution.csv"), "--out", str(again)]) == 0
    assert (again / "diagnostics.json").read_bytes() == (tmp_path / "diagnostics.json").read_bytes()


def test_poles_command(solved, tmp_path, capsys):
    assert main(["poles", str(solved / "solution.csv"), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "poles.json").read_text())
    # the double pole at +-i pi splits slightly; its cluster centroid is sharp
    first = rep["clusters"][0]
    assert first["multiplicity"] == 2
    assert abs(first["centroid"][0]) + abs(abs(first["centroid"][1]) - 3.14159265) <= 1e-3
    assert "multiplicity" in capsys.readouterr().out
    assert main(["poles", str(solved / "solution.csv"), "--max-degree", "13"]) == 1


def test_not_converged_exit_code(tmp_path, capsys):
    cfg = _gkdv(tmp_path, tol=1e-30, max_iter=40)
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["converged"] is False and report["status"] == "max_iter"
    assert "best residual" in capsys.readouterr().err


def test_invalid_speed_exit_code(tmp_path):
    data = json.loads((CONFIGS / "gkdv_l1_V2.json").read_text())
    data["problem"]["V"] = 0.5
    assert main(["solve", "--config", str(_write(tmp_path / "c.json", data))]) == 1


def test_unknown_key_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"problem": None, "typo": 1})
    assert main(["solve", "--config", str(cfg)]) == 1
    assert "typo" in capsys.readouterr().err


def test_gaussian_diagnose_is_inconclusive(tmp_path):
    import numpy as np

    from sectorwave import spectral

    g = closedform.REFERENCE_GRID
    spectral.write_csv(spectral.SpectralField(g, values=np.exp(-g.x**2)), tmp_path / "g.csv")
    assert main(["diagnose", str(tmp_path / "g.csv"), "--out", str(tmp_path)]) == 3
    rep = json.loads((tmp_path / "diagnostics.json").read_text())
    assert rep["undecided"]


def test_flat_field_is_input_error(tmp_path):
    import numpy as np

    from sectorwave import spectral

    g = closedform.REFERENCE_GRID
    spectral.write_csv(spectral.SpectralField(g, values=np.ones(g.n)), tmp_path / "flat.csv")
    assert main(["diagnose", str(tmp_path / "flat.csv"), "--out", str(tmp_path)]) == 1


def test_missing_file_is_input_error(tmp_path):
    assert main(["diagnose", str(tmp_path / "none.csv")]) == 1


@pytest.mark.parametrize("name", closedform.list_cases())
def test_verify_cases(name, capsys):
    assert main(["verify", name]) == 0
    out = capsys.readouterr().out
    assert out.rstrip().endswith("PASS")


def test_verify_unknown_case(capsys):
    assert main(["verify", "nope"]) == 1
    assert "nope" in capsys.readouterr().err


def test_oracle_list_and_export(tmp_path, capsys):
    assert main(["oracle", "list"]) == 0
    listed = capsys.readouterr().out
    for name in closedform.list_cases():
        assert name in listed
    assert main(["oracle", "export", "nls_ground_state", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "nls_ground_state.csv").exists()
    assert main(["oracle", "export", "nope"]) == 1


def test_sweep_preserves_input_order(tmp_path):
    cfg = CONFIGS / "sweep_gkdv.json"
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "a"), "--jobs", "3"]) == 0
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "sweep.json").read_bytes()
    assert a == (tmp_path / "b" / "sweep.json").read_bytes()
    results = json.loads(a)["results"]
    assert [(r["l"], r["V"]) for r in results] == [(l, V) for l in (1, 2, 3) for V in (1.5, 2.0, 3.0)]
    assert all(r["status"] == "ok" for r in results)


def test_sweep_without_section(tmp_path):
    assert main(["sweep", "--config", str(CONFIGS / "gkdv_l1_V2.json")]) == 1


def test_seed_is_recorded(solved, tmp_path):
    main(["diagnose", str(solved / "solution.csv"), "--out", str(tmp_path), "--seed", "42"])
    assert json.loads((tmp_path / "diagnostics.json").read_text())["seed"] == 42


def test_log_level_from_environment(tmp_path):
    env = dict(os.environ, SECTORWAVE_LOG="debug")
    proc = subprocess.run(
        [sys.executable, "-m", "sectorwave", "verify", "nope"], capture_output=True, text=True, env=env
    )
    assert proc.returncode == 1
    proc = subprocess.run([sys.executable, "-m", "sectorwave", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout
