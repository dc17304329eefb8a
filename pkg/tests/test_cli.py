import json
import subprocess
import sys

from gnrelax.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main

FAST = ["--override", "grid.n_points=32", "--override", "policy.t_end=0.02"]


def test_single_run_writes_outputs(tmp_path, capsys):
    assert main(["single-run", "--output", str(tmp_path), *FAST]) == EXIT_OK
    assert (tmp_path / "single_run.csv").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["experiment"] == "single_run"
    assert "results written" in capsys.readouterr().out


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["single-run", "--output", str(tmp_path), "--override", "initial_data.amplitude=0.95"]) == EXIT_CONFIG
    assert "depth floor" in capsys.readouterr().err
    assert main(["toy-demo", "--override", "toy.epsilonn=1"]) == EXIT_CONFIG
    assert main(["run"]) == EXIT_CONFIG
    bad = tmp_path / "bad.yaml"
    bad.write_text("experiment: single_run\nparams: {lam: fast}\n")
    assert main(["run", "--config", str(bad)]) == EXIT_CONFIG


def test_numerical_abort_exit_3(tmp_path, capsys):
    args = ["single-run", "--output", str(tmp_path), *FAST, "--override", "policy.fixed_dt=0.5"]
    args += ["--override", "policy.t_end=50.0", "--override", "policy.scheme=rk4_explicit"]
    assert main(args) == EXIT_NUMERICAL
    assert "numerical abort" in capsys.readouterr().err


def test_run_with_config_and_jobs(tmp_path):
    path = tmp_path / "conv.yaml"
    path.write_text(
        "experiment: convergence_lambda\n"
        "grid: {n_points: 32}\n"
        "policy: {t_end: 0.02}\n"
        "params: {lam_sweep: [1e3, 1e4]}\n"
        f"output_dir: {tmp_path / 'out'}\n"
    )
    assert main(["run", "--config", str(path), "--jobs", "2"]) == EXIT_OK
    rows = (tmp_path / "out" / "convergence_lambda.csv").read_text().splitlines()
    assert len(rows) == 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "gnrelax", "toy-demo", "--output", str(tmp_path), "--override", "toy.n_times=3",
         "--override", "grid.n_points=32"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "toy_demo.csv").exists()
