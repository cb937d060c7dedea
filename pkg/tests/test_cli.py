import json
import subprocess
import sys

import numpy as np
import pytest

from robustpca2d import cli
from robustpca2d.datasets import load_matrix_text, load_pgm_directory

from test_bench import SMALL


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL.format(out=tmp_path / "out"))
    return path


def test_bench_command(config, tmp_path, capsys):
    assert cli.main(["bench", "--config", str(config), "--method", "pca,2dpca", "--k", "3"]) == 0
    doc = json.loads((tmp_path / "out" / "results.json").read_text())
    assert set(doc["methods"]) == {"pca", "2dpca"} and doc["methods"]["pca"]["k"] == 3
    assert "accuracy=" in capsys.readouterr().out


def test_flags_override_config(config, tmp_path):
    out = tmp_path / "other"
    rc = cli.main(["bench", "--config", str(config), "--method", "2dl1pca", "--split", "random",
                   "--seed", "5", "--train-per-subject", "2", "--out", str(out)])
    assert rc == 0
    doc = json.loads((out / "results.json").read_text())
    assert doc["dataset"]["split"] == "random" and doc["dataset"]["split_seed"] == 5
    assert doc["dataset"]["n_train"] == 8


def test_trace_command(config, tmp_path, capsys):
    rc = cli.main(["trace", "--config", str(config), "--method", "2dr1pca", "--max-iters", "9", "--tol", "0"])
    assert rc == 0
    lines = (tmp_path / "out" / "trace_2dr1pca.csv").read_text().splitlines()
    assert len(lines) == 10 and lines[0] == "iteration,update_norm,change_norm,objective"
    assert "not converged" in capsys.readouterr().out


def test_sweep_command(config, tmp_path):
    assert cli.main(["sweep", "--config", str(config), "--method", "2dpca", "--k-values", "1-3,5"]) == 0
    lines = (tmp_path / "out" / "sweep.csv").read_text().splitlines()
    assert lines[0] == "method,k,accuracy" and [l.split(",")[1] for l in lines[1:]] == ["1", "2", "3", "5"]


def test_exit_codes(config, tmp_path, capsys):
    assert cli.main(["bench", "--config", str(config), "--method", "svm"]) == cli.EXIT_CONFIG
    assert "unknown method" in capsys.readouterr().err
    assert cli.main(["bench"]) == cli.EXIT_CONFIG
    assert cli.main(["bench", "--config", str(tmp_path / "missing.ini")]) == cli.EXIT_CONFIG
    assert cli.main(["bench", "--dataset", str(tmp_path / "none"), "--method", "pca"]) == cli.EXIT_DATASET
    assert "dataset error" in capsys.readouterr().err
    rc = cli.main(["bench", "--config", str(config), "--method", "r1pca", "--max-iters", "2", "--tol", "0", "--strict"])
    assert rc == cli.EXIT_NUMERIC
    rc = cli.main(["trace", "--config", str(config), "--max-iters", "2", "--tol", "0", "--strict"])
    assert rc == cli.EXIT_NUMERIC
    assert cli.main(["sweep", "--config", str(config), "--k-values", "x"]) == cli.EXIT_CONFIG


def test_synth_faces_and_bench_on_disk(tmp_path):
    data = tmp_path / "faces"
    rc = cli.main(["synth", "--out", str(data), "--subjects", "3", "--per-subject", "10", "--rows", "8", "--cols", "6"])
    assert rc == 0
    ds = load_pgm_directory(data, "orl")
    assert ds.n == 30 and ds.shape == (8, 6)
    rc = cli.main(["bench", "--dataset", str(data), "--layout", "orl", "--method", "pca,2dpca", "--k", "2",
                   "--out", str(tmp_path / "res")])
    assert rc == 0


def test_synth_line(tmp_path):
    out = tmp_path / "line"
    assert cli.main(["synth", "--kind", "line", "--out", str(out), "--dim", "4", "--inliers", "20",
                     "--outliers", "2"]) == 0
    assert load_matrix_text(out / "data.txt").shape == (4, 22)
    u = load_matrix_text(out / "direction.txt")[0]
    assert np.linalg.norm(u) == pytest.approx(1.0)


def test_oracle_command(tmp_path, capsys):
    out = tmp_path / "oracle.json"
    assert cli.main(["oracle", "--instances", "5", "--out", str(out)]) == 0
    s = json.loads(out.read_text())
    assert s["instances"] == 5 and s["consistent"] == 5
    assert s["ratio_at_least_0.99"] <= 5 and 0 < s["worst_ratio"] <= 1 + 1e-12


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "robustpca2d", "-v", "oracle", "--instances", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "attained_optimum" in r.stdout
    r = subprocess.run([sys.executable, "-m", "robustpca2d", "bench"], capture_output=True, text=True)
    assert r.returncode == 2
