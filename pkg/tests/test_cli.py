"""Command line front end: flags, config, determinism, exit codes."""

import json
import subprocess
import sys

import pytest

from osclab.cli import main

LINEAR_CURVE_FLAGS = [
    "curve", "--function", "linear:d=1:v=1", "--p", "2",
    "--kappa-max", "0.02", "--kappa-min", "0.00002",
    "--omega=-0.5:0.5", "--r-max", "50", "--samples", "64",
]


def run_cli(args, monkeypatch=None):
    return main(list(args))


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def test_catalog_lists_entries(capsys):
    assert main(["catalog"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) >= 6
    assert any("plateau" in ln for ln in lines)


def test_catalog_filter_by_dimension(capsys):
    assert main(["catalog", "--d", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines and all("d=2" in ln for ln in lines)


def test_catalog_unknown_filter_key_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["catalog", "--filter", "bogus=1"])
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# oscillation
# ---------------------------------------------------------------------------

def test_oscillation_linear_closed_form(capsys):
    assert main(["oscillation", "--function", "linear:d=1:v=1",
                 "--r", "1"]) == 0
    out = capsys.readouterr().out
    assert "= 0.5 " in out


def test_oscillation_constant_is_zero(capsys):
    assert main(["oscillation", "--function", "linear:d=1:v=0",
                 "--r", "2"]) == 0
    assert "= 0 " in capsys.readouterr().out


def test_oscillation_q2_closed_form(capsys):
    assert main(["oscillation", "--function", "linear:d=1:v=1",
                 "--r", "1", "--q", "2"]) == 0
    assert "0.57735" in capsys.readouterr().out


def test_oscillation_writes_json_with_config_echo(tmp_path, capsys):
    assert main(["oscillation", "--function", "indicator:d=1:r=0.5",
                 "--a", "0.25", "--r", "0.5", "--seed", "5",
                 "--out-dir", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "oscillation.json").read_text())
    assert payload["value"] == pytest.approx(0.375)
    assert payload["config"]["seed"] == 5
    assert payload["config"]["function"] == "indicator:d=1:r=0.5"


@pytest.mark.parametrize("args", [
    ["oscillation", "--function", "nope:d=1", "--r", "1"],
    ["oscillation", "--function", "linear:d=1:v=1"],          # missing r
    ["oscillation", "--function", "linear:d=1:v=1", "--r", "-1"],
    ["oscillation", "--function", "linear:d=2:v=1,0", "--r", "1",
     "--d", "1"],                                             # dim mismatch
])
def test_oscillation_usage_errors(args):
    with pytest.raises(SystemExit) as exc:
        main(args)
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# curve
# ---------------------------------------------------------------------------

def test_curve_writes_csv_and_json(tmp_path, capsys):
    assert main(LINEAR_CURVE_FLAGS + ["--out-dir", str(tmp_path)]) == 0
    csv_text = (tmp_path / "curve.csv").read_text()
    assert csv_text.startswith("# osclab-curve-schema 1\n")
    assert "kappa,nu,nu_stderr,kappa_p_nu,tail_bound" in csv_text
    payload = json.loads((tmp_path / "curve.json").read_text())
    assert payload["summary"]["reference_value"] == pytest.approx(0.125)
    assert payload["summary"]["limit_estimate"] == pytest.approx(0.125,
                                                                 rel=1e-3)
    cfg = payload["config"]
    assert cfg["p"] == 2.0 and cfg["seed"] == 20260819
    assert cfg["domain"]["box"] == [[-0.5, 0.5]]
    assert "threads" not in cfg  # runtime knob, not experiment config


def test_curve_byte_identical_across_threads_and_runs(tmp_path):
    outs = []
    for name, threads in [("a", "1"), ("b", "3"), ("c", "1")]:
        d = tmp_path / name
        assert main(LINEAR_CURVE_FLAGS
                    + ["--threads", threads, "--out-dir", str(d)]) == 0
        outs.append(((d / "curve.csv").read_bytes(),
                     (d / "curve.json").read_bytes()))
    assert outs[0] == outs[1] == outs[2]


def test_curve_config_file_and_flag_override(tmp_path, capsys):
    ini = tmp_path / "exp.ini"
    ini.write_text(
        "[experiment]\n"
        "function = linear:d=1:v=1\n"
        "p = 2\n"
        "[kappa]\n"
        "kappa_max = 0.02\n"
        "kappa_min = 0.00002\n"
        "[domain]\n"
        "omega = -0.5:0.5\n"
        "r_max = 50\n"
        "[run]\n"
        "samples = 64\n"
        "seed = 11\n")
    d1 = tmp_path / "from_config"
    assert main(["curve", "--config", str(ini),
                 "--out-dir", str(d1)]) == 0
    payload = json.loads((d1 / "curve.json").read_text())
    assert payload["config"]["seed"] == 11
    d2 = tmp_path / "override"
    assert main(["curve", "--config", str(ini), "--seed", "12",
                 "--out-dir", str(d2)]) == 0
    payload2 = json.loads((d2 / "curve.json").read_text())
    assert payload2["config"]["seed"] == 12


def test_env_seed_fallback(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("OSCLAB_SEED", "777")
    d = tmp_path / "env"
    assert main(LINEAR_CURVE_FLAGS + ["--out-dir", str(d)]) == 0
    payload = json.loads((d / "curve.json").read_text())
    assert payload["config"]["seed"] == 777


def test_missing_config_file_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["curve", "--config", str(tmp_path / "absent.ini")])
    assert exc.value.code == 2


def test_curve_rejects_narrow_grid():
    with pytest.raises(SystemExit) as exc:
        main(["curve", "--function", "linear:d=1:v=1",
              "--kappa-max", "0.02", "--kappa-min", "0.01"])
    assert exc.value.code == 2


def test_curve_rejects_q_not_one():
    with pytest.raises(SystemExit) as exc:
        main(LINEAR_CURVE_FLAGS + ["--q", "2"])
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def test_verify_exit_zero_and_report(tmp_path, capsys):
    code = main(["verify", "--samples", "8", "--nodes", "1024",
                 "--out-dir", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0, out
    payload = json.loads((tmp_path / "verify.json").read_text())
    assert payload["report"]["passed"] is True
    assert payload["config"]["samples"] == 8
    assert "suites:" in out


def test_verify_fault_injection_fails(capsys):
    code = main(["verify", "--samples", "8", "--nodes", "1024",
                 "--fault-inject", "slope"])
    assert code == 1
    assert "FAIL" in capsys.readouterr().out


def test_verify_unknown_fault_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--fault-inject", "gremlins"])
    assert exc.value.code == 2


def test_console_script_end_to_end():
    proc = subprocess.run(
        [sys.executable, "-m", "osclab.cli", "oscillation",
         "--function", "linear:d=1:v=1", "--r", "1"],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "= 0.5 " in proc.stdout
