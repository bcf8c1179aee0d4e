import subprocess
import sys

import pytest
import yaml

from eeqt_arrival.cli import EXIT_NUMERICAL, EXIT_ORACLE, EXIT_USAGE, main, resolve_config, build_parser
from eeqt_arrival.io import read_header, read_table


def run(*args):
    return main([str(a) for a in args])


def test_density_writes_header_and_columns(tmp_path):
    out = tmp_path / "d.csv"
    assert run("density", "--alpha", 1.0, "--t-max", 60, "--tol", 1e-5, "-o", out) == 0
    header, cols = read_table(out)
    assert header["program"] == "eeqt-arrival"
    assert set(cols) == {"t", "p", "P", "wigner"}
    assert cols["P"][-1] <= float(header["efficiency"]) + 1e-12


def test_rerun_is_byte_identical(tmp_path):
    out = tmp_path / "s.csv"
    args = ("simulate", "--alpha", 1.0, "-n", 3000, "--seed", 5, "--t-max", 60, "--tol", 1e-5, "-o", out)
    assert run(*args) == 0
    first = out.read_bytes()
    assert run(*args) == 0
    assert out.read_bytes() == first


def test_config_from_previous_output(tmp_path):
    out = tmp_path / "a.csv"
    assert run("density", "--alpha", 0.7, "--x0", -5, "--t-max", 40, "--tol", 1e-5, "-o", out) == 0
    again = tmp_path / "b.csv"
    assert run("density", "--config", out, "-o", again) == 0
    assert out.read_text().split("\n", 4)[4] == again.read_text().split("\n", 4)[4]
    assert read_header(again)["config"].replace(str(again), str(out)) == read_header(out)["config"]


def test_yaml_config_and_flag_override(tmp_path):
    cfg_file = tmp_path / "run.yaml"
    cfg_file.write_text(yaml.safe_dump({"x0": -6.0, "v": 1.5, "alphas": [2.0], "t_max": 50.0}))
    args = build_parser().parse_args(["density", "--config", str(cfg_file), "--v", "3"])
    cfg = resolve_config(args)
    assert (cfg.x0, cfg.v, cfg.alphas, cfg.t_max) == (-6.0, 3.0, [2.0], 50.0)


def test_physical_units(tmp_path):
    # hbar = 2, m = 1, eta = 0.5: kappa = 4 is alpha = 1, x0 = -4 is -8 widths
    args = build_parser().parse_args(["density", "--kappas", "4", "--hbar", "2", "--eta", "0.5", "--x0", "-4"])
    cfg = resolve_config(args)
    assert cfg.natural_alphas() == [1.0]
    assert cfg.packet().x0 == -8.0


def test_command_defaults():
    cfg = resolve_config(build_parser().parse_args(["optimize"]))
    assert (cfg.x0, cfg.v) == (0.0, 0.0)


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        run("density", "--frobnicate", 1)
    assert exc.value.code == EXIT_USAGE


def test_bad_values_are_usage_errors(tmp_path):
    assert run("density", "--alpha", -1, "-o", tmp_path / "x.csv") == EXIT_USAGE
    assert run("density", "--hbar", 0, "-o", tmp_path / "x.csv") == EXIT_USAGE
    (tmp_path / "bad.yaml").write_text("nonsense_key: 1\n")
    assert run("density", "--config", tmp_path / "bad.yaml") == EXIT_USAGE


def test_invalid_bracket_is_numerical_failure(tmp_path, capsys):
    assert run("optimize", "--bracket", "2,5", "-o", tmp_path / "o.csv") == EXIT_NUMERICAL
    assert "bracket invalid" in capsys.readouterr().err


def test_oracle_failure_exit_code(tmp_path):
    code = run("oracle-check", "--alphas", 1.0, "--dxs", "0.2,0.1", "--t-end", 4, "--l1-tol", 1e-9,
               "-o", tmp_path / "o.csv")
    assert code == EXIT_ORACLE
    assert read_header(tmp_path / "o.csv")["overall"] == "FAIL"


def test_optimize_reports_known_optimum(tmp_path):
    out = tmp_path / "opt.csv"
    assert run("optimize", "--alpha-tol", 1e-3, "-o", out) == 0
    _, cols = read_table(out)
    assert cols["alpha_star"][0] == pytest.approx(1.3216, abs=2e-3)


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "eeqt_arrival.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip()
