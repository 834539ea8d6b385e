import json
import subprocess
import sys

import numpy as np
import pytest

from coordsketch import exact_product, least_squares
from coordsketch.cli import cli_dispatch
from coordsketch.io import load_matrix, read_dense_csv, save_matrix

from conftest import random_sparse


@pytest.fixture
def pair(tmp_path, rng):
    A, B = random_sparse(rng, 20, 4), random_sparse(rng, 20, 3)
    save_matrix(A, tmp_path / "a.mtx")
    save_matrix(B, tmp_path / "b.csv")
    return A, B


def run(*argv):
    return cli_dispatch([str(a) for a in argv])


@pytest.mark.parametrize("method", ["priority", "threshold"])
def test_saturated_pipeline(method, pair, tmp_path, capsys):
    A, B = pair
    k = 100 if method == "priority" else 10**6
    assert run("sketch", tmp_path / "a.mtx", "--method", method, "--k", k, "--seed", 4, "--out", tmp_path / "sa") == 0
    assert run("sketch", tmp_path / "b.csv", "--method", method, "--k", k, "--seed", 4, "--out", tmp_path / "sb") == 0
    assert run("estimate", tmp_path / "sa", tmp_path / "sb", "--out", tmp_path / "w.csv",
               "--truth-a", tmp_path / "a.mtx", "--truth-b", tmp_path / "b.csv") == 0
    W = read_dense_csv(tmp_path / "w.csv")
    np.testing.assert_allclose(W, exact_product(A, B), rtol=0, atol=1e-9)
    assert json.loads(capsys.readouterr().out)["product_error"] < 1e-12


def test_estimate_to_stdout(pair, tmp_path, capsys):
    for name in ("a.mtx", "b.csv"):
        assert run("sketch", tmp_path / name, "--method", "countsketch", "--k", 6, "--seed", 1,
                   "--out", tmp_path / (name + ".sk")) == 0
    assert run("estimate", tmp_path / "a.mtx.sk", tmp_path / "b.csv.sk") == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert len(rows) == 4 and all(len(r.split(",")) == 3 for r in rows)


def test_seed_mismatch_exit_3(pair, tmp_path):
    run("sketch", tmp_path / "a.mtx", "--method", "priority", "--k", 5, "--seed", 1, "--out", tmp_path / "sa")
    run("sketch", tmp_path / "b.csv", "--method", "priority", "--k", 5, "--seed", 2, "--out", tmp_path / "sb")
    assert run("estimate", tmp_path / "sa", tmp_path / "sb") == 3


def test_mixed_sketch_types_exit_3(pair, tmp_path):
    run("sketch", tmp_path / "a.mtx", "--method", "priority", "--k", 5, "--seed", 1, "--out", tmp_path / "sa")
    run("sketch", tmp_path / "b.csv", "--method", "sign", "--k", 5, "--seed", 1, "--out", tmp_path / "sb")
    assert run("estimate", tmp_path / "sa", tmp_path / "sb") == 3


@pytest.mark.parametrize("gram", ["exact", "single"])
def test_gen_and_regress(gram, tmp_path, capsys):
    assert run("gen", "--task", "regression", "--n", 300, "--d", 4, "--sparsity", 0.5, "--seed", 3,
               "--out-a", tmp_path / "A.mtx", "--out-b", tmp_path / "b.mtx", "--out-x", tmp_path / "x.csv") == 0
    assert run("sketch", tmp_path / "A.mtx", "--method", "regression", "--gram", gram, "--k", 300,
               "--seed", 8, "--out", tmp_path / "ra") == 0
    assert run("sketch", tmp_path / "b.mtx", "--method", "priority", "--k", 300, "--seed", 8,
               "--out", tmp_path / "sb") == 0
    assert run("regress", tmp_path / "ra", tmp_path / "sb", "--out", tmp_path / "xt.csv",
               "--truth-a", tmp_path / "A.mtx", "--truth-b", tmp_path / "b.mtx") == 0
    A, b = load_matrix(tmp_path / "A.mtx"), load_matrix(tmp_path / "b.mtx").to_dense()[:, 0]
    x = read_dense_csv(tmp_path / "xt.csv")[:, 0]
    assert np.linalg.norm(x - least_squares(A, b)) <= 1e-9
    metrics = json.loads(capsys.readouterr().out)
    assert metrics["additive_error"] <= 1e-12
    assert read_dense_csv(tmp_path / "x.csv").shape == (4, 1)


def test_gen_product(tmp_path):
    assert run("gen", "--n", 50, "--d", 3, "--m", 2, "--sparsity", 0.4,
               "--out-a", tmp_path / "A.mtx", "--out-b", tmp_path / "B.csv") == 0
    assert load_matrix(tmp_path / "A.mtx").nnz == 60
    assert load_matrix(tmp_path / "B.csv").shape == (50, 2)


def test_regress_wrong_inputs(pair, tmp_path):
    run("sketch", tmp_path / "a.mtx", "--method", "priority", "--k", 5, "--seed", 1, "--out", tmp_path / "sa")
    assert run("regress", tmp_path / "sa", tmp_path / "sa") == 3


def _write_config(path):
    config = {"task": "product", "methods": ["priority", "threshold", "gaussian"], "budgets": [300, 600],
              "trials": 3, "seed": 5, "synthetic": {"n": 200, "d": 8, "m": 6, "sparsity": 0.3, "seed": 2}}
    path.write_text(json.dumps(config))


def test_bench_reproducible(tmp_path):
    _write_config(tmp_path / "cfg.json")
    assert run("bench", tmp_path / "cfg.json", "--out", tmp_path / "r1.csv") == 0
    assert run("bench", tmp_path / "cfg.json", "--out", tmp_path / "r2.csv", "--workers", 2) == 0
    one, two = (tmp_path / "r1.csv").read_bytes(), (tmp_path / "r2.csv").read_bytes()
    assert one == two
    assert one.startswith(b"method,budget_items,trial,error,wall_time_s\n")
    assert len(one.splitlines()) == 1 + 3 * 2 * 3


def test_bench_bad_config(tmp_path):
    (tmp_path / "bad.json").write_text("{not json")
    assert run("bench", tmp_path / "bad.json") == 4
    (tmp_path / "nob.json").write_text(json.dumps({"task": "product"}))
    assert run("bench", tmp_path / "nob.json") == 2


@pytest.mark.parametrize(
    "argv",
    [[], ["frobnicate"], ["sketch", "x.mtx", "--method", "priority", "--k", "0", "--seed", "1", "--out", "o"],
     ["sketch", "x.mtx", "--method", "lsh", "--k", "3", "--seed", "1", "--out", "o"],
     ["sketch", "x.mtx", "--method", "priority", "--k", "3", "--seed", "-1", "--out", "o"]],
)
def test_usage_errors(argv, capsys):
    assert cli_dispatch(argv) == 2
    assert capsys.readouterr().out == ""


def test_missing_input_exit_4(tmp_path):
    assert run("sketch", tmp_path / "none.mtx", "--method", "priority", "--k", 3, "--seed", 1,
               "--out", tmp_path / "o") == 4


def test_parse_error_exit_4(tmp_path, capsys):
    (tmp_path / "bad.mtx").write_text("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 q 1\n")
    assert run("sketch", tmp_path / "bad.mtx", "--method", "priority", "--k", 3, "--seed", 1,
               "--out", tmp_path / "o") == 4
    assert ":3:" in capsys.readouterr().err


def test_corrupt_sketch_exit_4(tmp_path):
    (tmp_path / "junk").write_bytes(b"garbage")
    assert run("estimate", tmp_path / "junk", tmp_path / "junk") == 4


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "coordsketch", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "coordsketch", "estimate"], capture_output=True, text=True)
    assert proc.returncode == 2 and proc.stderr
