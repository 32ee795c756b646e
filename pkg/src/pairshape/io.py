"""Outline readers/writers and JSON persistence for fitted objects."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .curves import CurveError, PlanarCurve, Srvf

CSV_HEADER = ["shape_id", "label", "x", "y"]
MODEL_VERSION = 1


class OutlineFormatError(ValueError):
    """Malformed outline file."""


def load_outlines(path, format: str = "csv", closed: bool = True) -> list[PlanarCurve]:
    """Read outlines from ``path``.

    ``format="csv"`` expects a single file with header ``shape_id,label,x,y``
    and one row per point in traversal order. ``format="txt"`` expects a
    directory of class sub-directories, each holding one ``x y`` file per shape.
    """
    path = Path(path)
    if format == "csv":
        curves = _load_csv(path, closed)
    elif format == "txt":
        curves = _load_txt_tree(path, closed)
    else:
        raise OutlineFormatError(f"unknown outline format {format!r}")
    if not curves:
        raise OutlineFormatError(f"no curves found in {path}")
    return curves


def _load_csv(path: Path, closed: bool) -> list[PlanarCurve]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return []
        if [h.strip() for h in header] != CSV_HEADER:
            raise OutlineFormatError(f"{path}:1: header must be {','.join(CSV_HEADER)}")
        order: list[str] = []
        points: dict[str, list] = {}
        labels: dict[str, str] = {}
        first_line: dict[str, int] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise OutlineFormatError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            sid, label, x, y = (c.strip() for c in row)
            if not sid:
                raise OutlineFormatError(f"{path}:{lineno}: empty shape_id")
            try:
                xy = (float(x), float(y))
            except ValueError:
                raise OutlineFormatError(f"{path}:{lineno}: non-numeric coordinate") from None
            if sid not in points:
                order.append(sid)
                points[sid] = []
                labels[sid] = label
                first_line[sid] = lineno
            elif labels[sid] != label:
                raise OutlineFormatError(f"{path}:{lineno}: label changes within shape {sid!r}")
            points[sid].append(xy)
    curves = []
    for sid in order:
        label = labels[sid]
        if label and not _is_int(label):
            raise OutlineFormatError(
                f"{path}:{first_line[sid]}: label {label!r} of shape {sid!r} is not an integer"
            )
        try:
            curves.append(PlanarCurve(points[sid], closed, int(label) if label else None, sid))
        except CurveError as exc:
            raise OutlineFormatError(
                f"{path}:{first_line[sid]}: shape {sid!r}: {exc}"
            ) from None
    return curves


def _is_int(s: str) -> bool:
    try:
        int(s)
    except ValueError:
        return False
    return True


def _load_txt_tree(root: Path, closed: bool) -> list[PlanarCurve]:
    if not root.is_dir():
        raise OutlineFormatError(f"{root} is not a directory")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    numeric = all(_is_int(d.name) for d in class_dirs)
    curves = []
    for idx, d in enumerate(class_dirs, start=1):
        label = int(d.name) if numeric else idx
        for f in sorted(p for p in d.iterdir() if p.is_file()):
            rows = []
            with open(f) as fh:
                for lineno, line in enumerate(fh, start=1):
                    parts = line.split()
                    if not parts:
                        continue
                    if len(parts) != 2:
                        raise OutlineFormatError(f"{f}:{lineno}: expected 'x y'")
                    try:
                        rows.append((float(parts[0]), float(parts[1])))
                    except ValueError:
                        raise OutlineFormatError(f"{f}:{lineno}: non-numeric coordinate") from None
            try:
                curves.append(PlanarCurve(rows, closed, label, f"{d.name}/{f.stem}"))
            except CurveError as exc:
                raise OutlineFormatError(f"{f}: {exc}") from None
    return curves


def write_outlines(curves: Iterable[PlanarCurve], path) -> None:
    """Write curves in the CSV outline format (x, y with 17 significant digits)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for i, c in enumerate(curves):
            sid = c.shape_id if c.shape_id is not None else f"shape{i}"
            lab = "" if c.label is None else str(c.label)
            for x, y in c.points:
                w.writerow([sid, lab, repr(float(x)), repr(float(y))])


# --- JSON helpers -----------------------------------------------------------

def srvf_to_dict(q: Srvf) -> dict:
    return {"values": q.values.tolist(), "closed": q.closed}


def srvf_from_dict(d: dict) -> Srvf:
    return Srvf(np.asarray(d["values"], dtype=float), bool(d["closed"]))


def save_json(obj: dict, path, kind: str) -> None:
    payload = {"format": "pairshape", "kind": kind, "version": MODEL_VERSION, **obj}
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_json(path, kind: str) -> dict:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != "pairshape" or payload.get("kind") != kind:
        raise OutlineFormatError(f"{path} is not a pairshape {kind} file")
    if payload.get("version") != MODEL_VERSION:
        raise OutlineFormatError(f"{path}: unsupported model version {payload.get('version')}")
    return payload


def stack_flat(shapes: Sequence[Srvf]) -> np.ndarray:
    return np.vstack([q.flat() for q in shapes])
