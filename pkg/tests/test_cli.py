import json

import pytest

from freefall.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_crit(capsys):
    code, out, _ = run(capsys, "crit", "--k", "1")
    assert code == 0
    data = json.loads(out)
    assert data["action"] == pytest.approx(8.107703070190471, rel=1e-14)
    assert data["gradient_residual"] < 1e-9
    assert data["critical_point"] == {"k": 1, "phase": 0.0}


def test_crit_phase(capsys):
    code, out, _ = run(capsys, "crit", "--k", "2", "--phase", "1.0")
    assert code == 0 and json.loads(out)["action"] == pytest.approx(12.8702, abs=1e-4)


@pytest.mark.parametrize("argv", [("crit", "--k", "0"), ("spectrum", "--k", "3", "--modes", "3"), ("crit",), ("nope",)])
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_spectrum(capsys):
    code, out, _ = run(capsys, "spectrum", "--k", "1", "--modes", "16")
    data = json.loads(out)
    assert code == 0 and data["morse_index"] == 1 and data["nullity"] == 1 and data["matches_closed_form"]
    code, out, _ = run(capsys, "spectrum", "--k", "2", "--modes", "16")
    assert json.loads(out)["morse_index"] == 3
    code, out, _ = run(capsys, "spectrum", "--k", "2", "--modes", "4", "--csv")
    lines = out.splitlines()
    assert lines[0] == "eigenvalue,multiplicity,label" and len(lines) == 7


def test_flow_writes_files(capsys, tmp_path):
    code, out, _ = run(capsys, "flow", "--k", "1", "--theta", "0.5", "--out", str(tmp_path))
    data = json.loads(out)
    assert code == 0 and data["converged"] and data["limit_circle"] == 1
    jsonl, csv_path = (tmp_path / "flow_k1_theta0.5.jsonl"), (tmp_path / "flow_k1_theta0.5.csv")
    assert jsonl.exists() and csv_path.exists()
    assert len(jsonl.read_text().splitlines()) <= 2001


def test_config_errors(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("stepsize = 1e-3\n")
    code, _, err = run(capsys, "crit", "--k", "1", "--config", str(cfg))
    assert code == 2 and "ConfigError" in err
    cfg.write_text("step = 0\n")
    assert run(capsys, "flow", "--k", "1", "--theta", "0", "--config", str(cfg))[0] == 2
    assert run(capsys, "ev", "--k", "1", "--jobs", "0")[0] == 2


def test_computational_error_exit_code(capsys, tmp_path):
    cfg = tmp_path / "short.cfg"
    cfg.write_text("max_s = 0.01\ntheta_samples = 8\n")
    code, _, err = run(capsys, "ev", "--k", "1", "--config", str(cfg), "--jobs", "1")
    assert code == 1 and err.startswith("SweepFailure")


def test_ev_and_homology(capsys, tmp_path):
    cfg = tmp_path / "fast.cfg"
    cfg.write_text("theta_samples = 36\n")
    code, out, _ = run(capsys, "ev", "--k", "1", "--config", str(cfg), "--jobs", "1", "--out", str(tmp_path))
    assert code == 0 and len(out.splitlines()) == 37
    assert (tmp_path / "ev_k1.csv").read_text() == out
    code, out, _ = run(capsys, "ev", "--k", "1", "--config", str(cfg), "--jobs", "1", "--format", "json")
    assert len(json.loads(out)["theta"]) == 36

    code, out, _ = run(capsys, "homology", "--K", "3", "--config", str(cfg), "--jobs", "1")
    data = json.loads(out)
    assert code == 0 and data["betti"] == {"1": 1, "6": 1}
    assert data["parities"] == {"m_2->M_1": 1, "m_3->M_2": 1}
    code, again, _ = run(capsys, "homology", "--K", "3", "--config", str(cfg), "--jobs", "1")
    assert again == out


def test_lincheck(capsys):
    code, out, _ = run(capsys, "lincheck", "--k", "1", "--theta", "1.0")
    data = json.loads(out)
    assert code == 0
    assert data["adjoint_discrepancy"][0] < 1e-3
    assert data["fd_order"] > 1.8
