import json
import subprocess
import sys

import numpy as np
import pytest

from aqnn.channels import ChannelSpec
from aqnn.cli import main, run_experiment
from aqnn.states import density_from_json, density_to_json, maximally_coherent


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def spec_file(tmp_path, spec, name="spec.json"):
    return write(tmp_path / name, spec.to_json())


def state_file(tmp_path, rho, name="state.json"):
    return write(tmp_path / name, density_to_json(rho))


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("alpha, expected", [(-1.0, 0.0), (-0.5, 0.5)])
def test_apply_mcs(tmp_path, capsys, alpha, expected):
    code, out, _ = run(["apply", "--spec", spec_file(tmp_path, ChannelSpec.ideal(2, uniform=alpha)),
                        "--state", state_file(tmp_path, maximally_coherent(2))], capsys)
    assert code == 0
    assert json.loads(out)["c_l1"] == pytest.approx(expected)


def test_apply_faulty_population(tmp_path, capsys):
    spec = spec_file(tmp_path, ChannelSpec.faulty(2, 0.2, uniform=-0.5))
    out_path = tmp_path / "out.json"
    code, _, _ = run(["apply", "--spec", spec, "--state", state_file(tmp_path, np.diag([1.0, 0.0])),
                      "--out", str(out_path)], capsys)
    assert code == 0
    rho = density_from_json(json.loads(out_path.read_text())["state"])
    assert np.allclose(rho, np.diag([0.8, 0.2]))


def test_iterate(tmp_path, capsys):
    code, out, _ = run(["iterate", "--spec", spec_file(tmp_path, ChannelSpec.ideal(3, uniform=-0.5)),
                        "--state", state_file(tmp_path, maximally_coherent(3)), "--iterations", "3"], capsys)
    assert code == 0
    assert json.loads(out)["c_l1"] == pytest.approx(2 * 0.5**3)


def test_apply_exit_codes(tmp_path, capsys):
    state = state_file(tmp_path, maximally_coherent(2))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["apply", "--spec", str(bad), "--state", state], capsys)[0] == 2
    assert run(["apply", "--spec", spec_file(tmp_path, ChannelSpec.ideal(3)), "--state", state], capsys)[0] == 3
    code, _, err = run(["apply", "--spec", spec_file(tmp_path, ChannelSpec.ideal(2, uniform=-2.5)),
                        "--state", state], capsys)
    assert code == 4 and "not CPTP" in err
    assert run(["apply", "--spec"], capsys)[0] == 2
    assert run(["no-such-command"], capsys)[0] == 2


def test_choi_and_cptp_check(tmp_path, capsys):
    spec = spec_file(tmp_path, ChannelSpec.faulty(2, 0.3, gamma=0.1, uniform=-0.6))
    code, out, _ = run(["choi", "--spec", spec], capsys)
    obj = json.loads(out)
    assert code == 0 and obj["dim"] == 2 and np.array(obj["choi"]["re"]).shape == (4, 4)
    code, out, _ = run(["cptp-check", "--spec", spec], capsys)
    assert code == 0 and json.loads(out)["cptp"] is True
    code, out, _ = run(["cptp-check", "--spec", spec_file(tmp_path, ChannelSpec.ideal(2, uniform=-3.0))], capsys)
    assert code == 0 and json.loads(out)["cptp"] is False


def test_classify_command(tmp_path, capsys):
    code, out, _ = run(["classify", "--spec", spec_file(tmp_path, ChannelSpec.ideal(3, uniform=-0.5))], capsys)
    assert code == 0 and json.loads(out)["is_gio"] is True
    code, out, _ = run(["classify", "--spec", spec_file(tmp_path, ChannelSpec.faulty(3, 0.3, gamma=0.1, uniform=-0.6))],
                       capsys)
    assert json.loads(out)["sio_certificate"] is not None
    shifted = ChannelSpec.faulty(3, 0.3, gamma=0.1, lambda_shift=0.05, uniform=-0.6)
    code, out, _ = run(["classify", "--spec", spec_file(tmp_path, shifted), "--budget", "100"], capsys)
    assert code == 0 and json.loads(out)["is_ncg"] is True
    assert run(["classify", "--spec", spec_file(tmp_path, ChannelSpec.ideal(2, uniform=-3.0))], capsys)[0] == 4


def test_dilate_command(tmp_path, capsys):
    code, out, _ = run(["dilate", "--spec", spec_file(tmp_path, ChannelSpec.ideal(3, uniform=-0.5)),
                        "--method", "gio"], capsys)
    assert code == 0 and json.loads(out)["residual"] < 1e-9
    boundary = ChannelSpec.faulty(2, 0.2, gamma=0.2, uniform=-0.2)
    code, out, _ = run(["dilate", "--spec", spec_file(tmp_path, boundary), "--method", "sio"], capsys)
    assert code == 0 and json.loads(out)["residual"] < 1e-9
    interior = spec_file(tmp_path, ChannelSpec.faulty(2, 0.2, gamma=0.2, uniform=-0.5))
    code, _, err = run(["dilate", "--spec", interior, "--method", "sio"], capsys)
    assert code == 5 and "--method generic" in err
    code, out, _ = run(["dilate", "--spec", interior, "--method", "generic", "--trials", "20"], capsys)
    assert code == 0 and json.loads(out)["residual"] < 1e-9


def test_diamond_command(tmp_path, capsys):
    a = spec_file(tmp_path, ChannelSpec.ideal(2, uniform=-0.65), "a.json")
    b = spec_file(tmp_path, ChannelSpec.faulty(2, 0.3, uniform=-0.65), "b.json")
    code, out, _ = run(["diamond", "--spec", a, "--spec", b, "--trials", "20"], capsys)
    obj = json.loads(out)
    assert code == 0 and obj["value"] == pytest.approx(0.3, abs=1e-6)
    assert obj["analytic_value"] == pytest.approx(0.3) and obj["lower_bound"] <= obj["value"] + 1e-7
    assert run(["diamond", "--spec", a], capsys)[0] == 2


def test_fig2_experiment(tmp_path):
    config = {"experiment": "fig2_depth_curve",
              "parameters": {"N": 100, "eta": 0.01, "D_grid": [1.0, 10.0, 49.5, 80.0, 99.0]}}
    text, summary = run_experiment(config, tmp_path / "fig2.csv")
    lines = text.strip().splitlines()
    assert lines[0] == "N,eta,D,alpha,analytic_depth,simulated_depth,agreement,status"
    assert summary["all_agree"] and summary["monotone_non_increasing"]
    assert summary["depth_at_half_power"] == 14
    assert lines[-1].split(",")[5] == "1"
    saved = json.loads((tmp_path / "fig2.summary.json").read_text())
    assert saved["depth_at_half_power"] == 14


def test_prop3_experiment():
    config = {"experiment": "prop3_diamond_sweep",
              "parameters": {"N": 3, "epsilon": [0.1 * k for k in range(1, 10)], "trials": 10}}
    _, summary = run_experiment(config)
    assert summary["rows"] == 9 and summary["failures"] == 0 and summary["max_abs_error"] < 1e-5


def test_gamma_experiment():
    config = {"experiment": "gamma_independence", "parameters": {"N": [2], "epsilon": [0.3], "gamma_points": 3}}
    text, summary = run_experiment(config)
    assert summary["rows"] == 3 and summary["max_abs_error"] < 1e-5
    assert "abs_gamma" in text.splitlines()[0]


def test_classify_family_without_shift_is_sio():
    config = {"experiment": "classify_family",
              "parameters": {"N": 3, "epsilon": [0.2, 0.5], "gamma": [0.0, 0.1], "lambda": [0.0]}}
    _, summary = run_experiment(config)
    assert summary["cptp_rows"] == summary["sio_certified_rows"] == summary["ncg_rows"] == 4


def test_cp_region_scan():
    config = {"experiment": "cp_region_scan",
              "parameters": {"N": 3, "epsilon": [0.3], "gamma": [0.0], "lambda": [0.0, 5.0], "alpha": [-0.6]}}
    text, summary = run_experiment(config)
    assert summary["rows"] == 2 and summary["cptp_rows"] == 1


def test_row_failures_are_recorded():
    config = {"experiment": "prop3_diamond_sweep", "parameters": {"N": 2, "epsilon": [0.3], "alpha": 0.5}}
    text, summary = run_experiment(config)
    assert summary["failures"] == 1 and "error:NotCPTP" in text


def test_experiment_is_deterministic(tmp_path, monkeypatch):
    config = {"experiment": "gamma_independence", "parameters": {"N": [2], "epsilon": [0.1, 0.5], "gamma_points": 2}}
    monkeypatch.setenv("AQNN_THREADS", "1")
    first, _ = run_experiment(config)
    monkeypatch.setenv("AQNN_THREADS", "4")
    assert run_experiment(config)[0] == first


def test_experiment_command_errors(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", {"experiment": "nope"})
    assert run(["experiment", "--config", cfg], capsys)[0] == 2
    cfg = write(tmp_path / "c.json", {"experiment": "fig2_depth_curve", "parameters": {"N": 100, "eta": 2}})
    assert run(["experiment", "--config", cfg], capsys)[0] == 2
    cfg = write(tmp_path / "c.json", {"experiment": "cp_region_scan", "parameters": {"epsilon": []}})
    assert run(["experiment", "--config", cfg], capsys)[0] == 2


def test_experiment_command_writes_csv(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    cfg = write(tmp_path / "c.json", {"experiment": "cp_region_scan", "parameters": {"N": 2}})
    code, stdout, _ = run(["experiment", "--config", cfg, "--out", str(out)], capsys)
    assert code == 0 and out.exists() and json.loads(stdout)["csv"] == str(out)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "aqnn.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "experiment" in proc.stdout
