import json

import pytest

from pairshape.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from pairshape.io import load_outlines, write_outlines
from pairshape.synthetic import circles_and_squares

FAST = ["--m", "24", "--seed-candidates", "3", "--no-polish", "--mean-tol", "1e-3", "--mean-max-iter", "10"]


@pytest.fixture
def dataset(tmp_path):
    path = tmp_path / "shapes.csv"
    write_outlines(circles_and_squares(5, seed=1), path)
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_usage_errors(capsys, tmp_path):
    code, _, err = run(capsys, "bogus")
    assert code == EXIT_USAGE and err.count("\n") == 1
    code, _, err = run(capsys, "train", "--synthetic", "outgroup", "--method", "XX", "--out", tmp_path / "c.json")
    assert code == EXIT_USAGE and "unknown method" in err
    code, _, err = run(capsys, "ingest")
    assert code == EXIT_USAGE and "--dataset" in err


def test_data_errors(capsys, tmp_path):
    code, _, err = run(capsys, "ingest", "--dataset", tmp_path / "missing.csv")
    assert code == EXIT_DATA and err.startswith("pairshape: data error")
    bad = tmp_path / "bad.csv"
    bad.write_text("shape_id,label,x,y\na,1,0,0\na,1,zz,1\n")
    code, _, err = run(capsys, "ingest", "--dataset", bad)
    assert code == EXIT_DATA and ":3:" in err and err.count("\n") == 1


def test_ingest_and_register(capsys, dataset, tmp_path):
    code, out, _ = run(capsys, "ingest", "--dataset", dataset, "--m", "40", "--out", tmp_path / "r.csv")
    assert code == EXIT_OK and "10 curves, 2 classes" in out
    assert all(c.m == 40 for c in load_outlines(tmp_path / "r.csv"))
    code, out, _ = run(capsys, "register", "--dataset", dataset, "--shapes", "c1_000", "c2_000",
                       "--steps", "4", "--out", tmp_path / "g.csv", *FAST)
    assert code == EXIT_OK and out.startswith("distance ")
    assert len(load_outlines(tmp_path / "g.csv")) == 5
    code, _, err = run(capsys, "register", "--dataset", dataset, "--shapes", "c1_000", "nope", *FAST)
    assert code == EXIT_DATA and "nope" in err


def test_mean(capsys, dataset, tmp_path):
    code, out, _ = run(capsys, "mean", "--dataset", dataset, "--label", "1", "--out", tmp_path / "m.json", *FAST)
    assert code == EXIT_OK and "5 shapes" in out
    assert json.loads((tmp_path / "m.json").read_text())["kind"] == "karcher_mean"


def test_train_classify_round_trip(capsys, dataset, tmp_path):
    model = tmp_path / "clf.json"
    code, out, _ = run(capsys, "train", "--dataset", dataset, "--method", "PP-REC", "--model", "LDA",
                       "--r", "2", "--out", model, *FAST)
    assert code == EXIT_OK and "1 PC spaces" in out
    code, out, _ = run(capsys, "classify", "--dataset", dataset, "--classifier", model,
                       "--out", tmp_path / "p.csv", *FAST)
    assert code == EXIT_OK and "misclassification 0.0000%" in out
    code, _, err = run(capsys, "classify", "--dataset", dataset, "--classifier", model, "--m", "30",
                       "--out", tmp_path / "p.csv")
    assert code == EXIT_USAGE


def test_experiment_byte_identical(capsys, dataset, tmp_path):
    args = ["experiment", "--dataset", dataset, "--method", "SS,PP-OS", "--model", "LDA", "--r", "1-2",
            "--splits", "2", *FAST]
    assert run(capsys, *args, "--train-per-class", "3", "--out", tmp_path / "a.csv")[0] == EXIT_OK
    assert run(capsys, *args, "--train-per-class", "3", "--out", tmp_path / "b.csv")[0] == EXIT_OK
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    assert len(a.decode().splitlines()) == 5
    code, _, err = run(capsys, *args, "--train-per-class", "9", "--out", tmp_path / "c.csv")
    assert code == EXIT_DATA and "class 1" in err


def test_config_file(capsys, dataset, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(f"[pairshape]\ndataset = {dataset}\nm = 30\n")
    code, out, _ = run(capsys, "--config", cfg, "ingest")
    assert code == EXIT_OK and "m=30" in out
    code, out, _ = run(capsys, "--config", cfg, "ingest", "--m", "20")
    assert "m=20" in out
    (tmp_path / "bad.ini").write_text("[other]\n")
    assert run(capsys, "--config", tmp_path / "bad.ini", "ingest")[0] == EXIT_DATA


def test_simulate(capsys, tmp_path):
    code, out, _ = run(capsys, "simulate", "--n", "2000", "--replicates", "2", "--out", tmp_path)
    assert code == EXIT_OK
    summary = json.loads(out)
    assert 0 < summary["aggregated_pairwise_rate"] < summary["overall_mean_rate"]
    assert (tmp_path / "q_sensitivity.csv").exists() and (tmp_path / "method_comparison.csv").exists()
