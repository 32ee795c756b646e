import numpy as np
import pytest

from pairshape.classify import ClassifierError
from pairshape.experiment import ExperimentConfig, ResultTable, emit_table, make_splits, run_experiment
from pairshape.manifold import MeanConfig
from pairshape.synthetic import circles_and_squares, outgroup_benchmark

FAST = MeanConfig(tol=1e-3, max_iter=10, anchors=3, registration=dict(seed_candidates=3, polish=False))


def test_splits_are_balanced_disjoint_and_reproducible():
    labels = np.repeat([1, 2, 3], [6, 7, 8])
    parts = make_splits(labels, 4, 5, seed=9)
    again = make_splits(labels, 4, 5, seed=9)
    for (tr, te), (tr2, te2) in zip(parts, again):
        assert np.array_equal(tr, tr2) and np.array_equal(te, te2)
        assert not set(tr) & set(te) and len(tr) + len(te) == len(labels)
        assert np.all(np.bincount(labels[tr])[1:] == 4)
    assert not all(np.array_equal(parts[0][0], p[0]) for p in parts[1:])
    with pytest.raises(ClassifierError, match="class 1 has 6 samples"):
        make_splits(labels, 6, 1, seed=0)


def test_result_table_rows_and_emit(tmp_path):
    t = ResultTable()
    for v in (10.0, 20.0, 30.0):
        t.add("PP-OS", "QDA", 4, v)
    t.add("SS", "LDA", 8, 5.0)
    rows = t.rows()
    assert [r["method"] for r in rows] == ["SS", "PP-OS"]
    assert rows[1]["mean_rate"] == 20.0 and rows[1]["stderr"] == pytest.approx(10 / np.sqrt(3))
    emit_table(t, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "method,model,r,mean_rate,stderr,n_splits"
    assert lines[2] == "PP-OS,QDA,4,20.0000,5.7735,3"
    with pytest.raises(ValueError):
        emit_table(ResultTable(), tmp_path / "e.csv")


def test_average_over_r():
    t = ResultTable(average_over_r=True)
    for r, vals in ((2, (0.0, 10.0)), (4, (20.0, 30.0))):
        for v in vals:
            t.add("SS", "QDA", r, v)
    (row,) = t.rows()
    assert row["r"] == "2-4" and row["mean_rate"] == 15.0 and row["n_splits"] == 2


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(splits=0)
    with pytest.raises(ValueError):
        ExperimentConfig(r_values=(0,))
    with pytest.raises(ClassifierError):
        ExperimentConfig(methods=("XX",))


def test_two_class_experiment_is_perfect():
    cfg = ExperimentConfig(m=24, methods=("SS", "PP-OS"), models=("LDA",), r_values=(2,), splits=2,
                           train_per_class=5, mean=FAST)
    table = run_experiment(cfg, circles_and_squares(8, seed=5))
    assert all(r["mean_rate"] == 0.0 for r in table.rows())


def test_experiment_is_deterministic(tmp_path):
    curves = outgroup_benchmark(4, seed=2)
    cfg = ExperimentConfig(m=20, methods=("SP-OS", "PP-REC"), models=("QDA",), r_values=(1,), splits=1,
                           train_per_class=3, mean=FAST)
    emit_table(run_experiment(cfg, curves), tmp_path / "a.csv")
    emit_table(run_experiment(cfg, curves), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
