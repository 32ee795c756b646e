import numpy as np
import pytest

from pairshape.curves import PlanarCurve
from pairshape.io import OutlineFormatError, load_json, load_outlines, save_json, write_outlines


def write(path, text):
    path.write_text(text)
    return path


def test_load_single_labeled_outline(tmp_path):
    t = np.arange(100) / 100
    rows = ["shape_id,label,x,y"] + [f"leaf1,3,{np.cos(2*np.pi*s)},{np.sin(2*np.pi*s)}" for s in t]
    curves = load_outlines(write(tmp_path / "a.csv", "\n".join(rows) + "\n"))
    assert len(curves) == 1
    assert curves[0].m == 100 and curves[0].label == 3 and curves[0].shape_id == "leaf1"


def test_empty_file(tmp_path):
    with pytest.raises(OutlineFormatError, match="no curves found"):
        load_outlines(write(tmp_path / "e.csv", ""))
    with pytest.raises(OutlineFormatError, match="no curves found"):
        load_outlines(write(tmp_path / "h.csv", "shape_id,label,x,y\n"))


def test_two_point_curve_named(tmp_path):
    text = "shape_id,label,x,y\ngood,1,0,0\ngood,1,1,0\ngood,1,1,1\nbad,2,0,0\nbad,2,1,1\n"
    with pytest.raises(OutlineFormatError, match=r"'bad'.*at least 3 points"):
        load_outlines(write(tmp_path / "b.csv", text))


def test_malformed_line_number(tmp_path):
    text = "shape_id,label,x,y\ns,1,0,0\ns,1,oops,0\n"
    with pytest.raises(OutlineFormatError, match=":3:"):
        load_outlines(write(tmp_path / "c.csv", text))
    text = "shape_id,label,x,y\ns,1,0,0,9\n"
    with pytest.raises(OutlineFormatError, match=":2: expected 4 fields"):
        load_outlines(write(tmp_path / "d.csv", text))


def test_bad_header(tmp_path):
    with pytest.raises(OutlineFormatError, match="header"):
        load_outlines(write(tmp_path / "x.csv", "id,x,y\n1,0,0\n"))


def test_unlabeled_and_label_conflict(tmp_path):
    text = "shape_id,label,x,y\ns,,0,0\ns,,1,0\ns,,1,1\n"
    assert load_outlines(write(tmp_path / "u.csv", text))[0].label is None
    text = "shape_id,label,x,y\ns,1,0,0\ns,2,1,0\ns,1,1,1\n"
    with pytest.raises(OutlineFormatError, match="label changes"):
        load_outlines(write(tmp_path / "v.csv", text))


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_outlines(tmp_path / "nope.csv")


def test_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    curves = [PlanarCurve(rng.normal(size=(7, 2)), True, k % 2 + 1, f"s{k}") for k in range(3)]
    write_outlines(curves, tmp_path / "o.csv")
    back = load_outlines(tmp_path / "o.csv")
    for a, b in zip(curves, back):
        assert np.array_equal(a.points, b.points) and a.label == b.label and a.shape_id == b.shape_id


def test_txt_tree(tmp_path):
    for cls in ("oak", "maple"):
        d = tmp_path / cls
        d.mkdir()
        for k in range(2):
            (d / f"{k}.txt").write_text("0 0\n1 0\n1 1\n0 1\n")
    curves = load_outlines(tmp_path, format="txt")
    assert len(curves) == 4
    # non-numeric directory names are numbered in sorted order
    assert {c.shape_id.split("/")[0]: c.label for c in curves} == {"maple": 1, "oak": 2}


def test_txt_numeric_labels_and_errors(tmp_path):
    d = tmp_path / "7"
    d.mkdir()
    (d / "a.txt").write_text("0 0\n1 0\n1 1\n")
    assert load_outlines(tmp_path, format="txt")[0].label == 7
    (d / "b.txt").write_text("0 0\n1\n")
    with pytest.raises(OutlineFormatError, match="b.txt:2"):
        load_outlines(tmp_path, format="txt")


def test_json_kind_and_version(tmp_path):
    save_json({"a": 1}, tmp_path / "m.json", "thing")
    assert load_json(tmp_path / "m.json", "thing")["a"] == 1
    with pytest.raises(OutlineFormatError):
        load_json(tmp_path / "m.json", "other")
