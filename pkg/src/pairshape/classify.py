"""Gaussian models in tangent PC coordinates and aggregated pairwise decisions."""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .curves import Srvf
from .io import load_json, save_json, srvf_from_dict, srvf_to_dict
from .manifold import (
    KarcherMean,
    ManifoldError,
    MeanConfig,
    PcBasis,
    karcher_mean,
    log_map,
    pc_coords,
    tpca,
)
from .registration import align

log = logging.getLogger(__name__)

RIDGE_THRESHOLD = 1e-8
RIDGE_SCALE = 1e-8
METHODS = ("SS", "SP-OS", "SP-REC", "PP-OS", "PP-REC")
MODELS = ("LDA", "QDA")


class ClassifierError(ValueError):
    pass


# --- Gaussian models --------------------------------------------------------

def ridge_for(cov: np.ndarray) -> float:
    """tau = 1e-8 trace / r when the smallest eigenvalue is below 1e-8, else 0."""
    r = cov.shape[0]
    if np.linalg.eigvalsh(cov)[0] >= RIDGE_THRESHOLD:
        return 0.0
    tr = float(np.trace(cov))
    return RIDGE_SCALE * tr / r if tr > 0 else RIDGE_SCALE


@dataclass(frozen=True)
class GaussianClassModel:
    """Mean and (ridged) covariance of one class; ``ridge`` records the added tau."""

    class_id: int
    mean: np.ndarray
    covariance: np.ndarray
    ridge: float = 0.0
    n: int = 0

    @property
    def raw_covariance(self) -> np.ndarray:
        return self.covariance - self.ridge * np.eye(len(self.mean))

    def to_dict(self) -> dict:
        return {
            "class_id": self.class_id,
            "mean": self.mean.tolist(),
            "covariance": self.covariance.tolist(),
            "ridge": self.ridge,
            "n": self.n,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GaussianClassModel":
        r = len(d["mean"])
        return cls(
            int(d["class_id"]),
            np.asarray(d["mean"], dtype=float),
            np.asarray(d["covariance"], dtype=float).reshape(r, r),
            float(d["ridge"]),
            int(d.get("n", 0)),
        )


def fit_gaussian(coords: np.ndarray, class_id: int = 0) -> GaussianClassModel:
    """Sample mean and covariance (divisor n - 1) with a ridge for near-singular cases."""
    x = np.atleast_2d(np.asarray(coords, dtype=float))
    n = x.shape[0]
    if n < 2:
        raise ClassifierError(f"class {class_id} needs at least 2 samples, got {n}")
    if not np.all(np.isfinite(x)):
        raise ClassifierError(f"class {class_id} has non-finite coordinates")
    mu = x.mean(axis=0)
    cov = np.cov(x, rowvar=False, ddof=1).reshape(x.shape[1], x.shape[1])
    cov = 0.5 * (cov + cov.T)
    tau = ridge_for(cov)
    return GaussianClassModel(class_id, mu, cov + tau * np.eye(len(mu)), tau, n)


def pooled_covariance(models: Sequence[GaussianClassModel]) -> np.ndarray:
    """Equal-weight average of the class covariances, ridged like a class covariance."""
    pooled = np.mean([m.raw_covariance for m in models], axis=0)
    return pooled + ridge_for(pooled) * np.eye(pooled.shape[0])


def log_likelihood(x, model: GaussianClassModel, pooled: Optional[np.ndarray] = None):
    """-1/2 log|2 pi S| - 1/2 (x - mu)' S^-1 (x - mu); S is ``pooled`` when given.

    ``x`` may be a single r-vector or an (n, r) array of rows.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ClassifierError("non-finite input to the log-likelihood")
    cov = model.covariance if pooled is None else np.asarray(pooled, dtype=float)
    r = len(model.mean)
    chol = np.linalg.cholesky(cov)
    diff = np.atleast_2d(x) - model.mean
    z = np.linalg.solve(chol, diff.T)
    maha = np.sum(z * z, axis=0)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    out = -0.5 * (r * np.log(2 * np.pi) + logdet) - 0.5 * maha
    return float(out[0]) if x.ndim == 1 else out


# --- specs ------------------------------------------------------------------

@dataclass(frozen=True)
class ClassifierSpec:
    """Projection scope, PC scope, decision rule, Gaussian model and PC dimension."""

    projection: str = "single"
    pc_scope: str = "single"
    decision: str = "one_shot"
    model: str = "QDA"
    r: int = 8

    def __post_init__(self):
        if self.projection not in ("single", "pairwise"):
            raise ClassifierError(f"unknown projection {self.projection!r}")
        if self.pc_scope not in ("single", "pairwise"):
            raise ClassifierError(f"unknown PC scope {self.pc_scope!r}")
        if self.decision not in ("one_shot", "recursive"):
            raise ClassifierError(f"unknown decision rule {self.decision!r}")
        if self.model not in MODELS:
            raise ClassifierError(f"unknown model {self.model!r}; use LDA or QDA")
        if int(self.r) < 1:
            raise ClassifierError(f"r must be positive, got {self.r}")
        if self.pc_scope == "single" and self.projection != "single":
            raise ClassifierError("a single PC space requires a single projection point")
        if self.decision == "recursive" and self.pc_scope != "pairwise":
            raise ClassifierError("recursive decisions need pairwise PC spaces")

    @classmethod
    def from_method(cls, method: str, model: str = "QDA", r: int = 8) -> "ClassifierSpec":
        """Build from a method name: SS, SS-OS, SP-OS, SP-REC, PP-OS or PP-REC."""
        name = method.upper()
        if name == "SS-OS":
            name = "SS"
        table = {
            "SS": ("single", "single", "one_shot"),
            "SP-OS": ("single", "pairwise", "one_shot"),
            "SP-REC": ("single", "pairwise", "recursive"),
            "PP-OS": ("pairwise", "pairwise", "one_shot"),
            "PP-REC": ("pairwise", "pairwise", "recursive"),
        }
        if name not in table:
            raise ClassifierError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
        return cls(*table[name], model=model.upper(), r=int(r))

    @property
    def method(self) -> str:
        if self.pc_scope == "single":
            return "SS"
        prefix = "SP" if self.projection == "single" else "PP"
        return f"{prefix}-{'OS' if self.decision == 'one_shot' else 'REC'}"

    def to_dict(self) -> dict:
        return {
            "projection": self.projection,
            "pc_scope": self.pc_scope,
            "decision": self.decision,
            "model": self.model,
            "r": int(self.r),
        }


# --- projection frames ------------------------------------------------------

@dataclass
class ProjectionFrame:
    """A projection point with the tangent rows of every training shape.

    ``key`` is "all" for the mean of all training data or the class pair (i, j).
    Frames depend only on the training split, so one set serves every
    model, r and decision rule.
    """

    key: object
    base: Srvf
    rows: np.ndarray
    labels: np.ndarray
    mean: Optional[KarcherMean] = None
    seconds: float = 0.0


def _check_training(labels: np.ndarray) -> list[int]:
    classes, counts = np.unique(labels, return_counts=True)
    if len(classes) < 2:
        raise ClassifierError("training data must contain at least 2 classes")
    small = classes[counts < 2]
    if len(small):
        raise ClassifierError(f"class {int(small[0])} has fewer than 2 training samples")
    if len(set(counts.tolist())) != 1:
        detail = ", ".join(f"{int(c)}:{int(n)}" for c, n in zip(classes, counts))
        raise ClassifierError(f"training classes must be balanced (sizes {detail})")
    return [int(c) for c in classes]


def tangent_rows(base: Srvf, shapes: Sequence[Srvf], registration: Optional[dict] = None) -> np.ndarray:
    """Register each shape to ``base`` and stack the flattened log maps."""
    registration = registration or {}
    rows = []
    for q in shapes:
        al = align(base, q, **registration)
        rows.append(log_map(base, al.apply(q)).flat())
    return np.vstack(rows) if rows else np.zeros((0, 2 * base.m))


def _frame(key, shapes, labels, idx, mean_config: MeanConfig) -> ProjectionFrame:
    t0 = time.perf_counter()
    km = karcher_mean([shapes[i] for i in idx], mean_config)
    # every training shape, including those that formed the mean, is registered
    # to the final projection point the same way test shapes will be
    rows = tangent_rows(km.mean, shapes, mean_config.registration)
    seconds = time.perf_counter() - t0
    log.info("frame %s: mean of %d shapes in %d iterations (%.2fs)", key, len(idx), km.iterations, seconds)
    return ProjectionFrame(key, km.mean, rows, np.asarray(labels), km, seconds)


def build_frames(
    shapes: Sequence[Srvf],
    labels: Sequence[int],
    projection: str,
    mean_config: Optional[MeanConfig] = None,
) -> dict:
    """Projection frames for "single" (one mean) or "pairwise" (one mean per pair)."""
    mean_config = mean_config or MeanConfig()
    labels = np.asarray(labels, dtype=int)
    classes = _check_training(labels)
    if projection == "single":
        return {"all": _frame("all", shapes, labels, np.arange(len(shapes)), mean_config)}
    if projection != "pairwise":
        raise ClassifierError(f"unknown projection {projection!r}")
    frames = {}
    for i, j in combinations(classes, 2):
        idx = np.flatnonzero((labels == i) | (labels == j))
        frames[(i, j)] = _frame((i, j), shapes, labels, idx, mean_config)
    return frames


# --- trained classifier -----------------------------------------------------

@dataclass(frozen=True)
class PairwiseSpace:
    """PC space built from the classes in ``pair`` with models for every class.

    ``pair`` is None for the single all-class space. ``frame`` names the
    projection point the space is attached to.
    """

    pair: Optional[tuple]
    frame: object
    basis: PcBasis
    models: tuple
    pooled_covariance: Optional[np.ndarray] = None

    def scores(self, coords: np.ndarray, model: str) -> np.ndarray:
        """(n, K) log-likelihoods of coordinate rows under every class model."""
        pooled = self.pooled_covariance if model == "LDA" else None
        return np.column_stack([log_likelihood(np.atleast_2d(coords), g, pooled) for g in self.models])


def _frame_key_to_json(key):
    return key if key == "all" else list(key)


def _frame_key_from_json(key):
    return key if key == "all" else tuple(int(k) for k in key)


@dataclass(frozen=True)
class Classifier:
    spec: ClassifierSpec
    classes: tuple
    bases: dict
    spaces: tuple
    registration: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "classes": list(self.classes),
            "bases": [[_frame_key_to_json(k), srvf_to_dict(b)] for k, b in self.bases.items()],
            "spaces": [
                {
                    "pair": None if s.pair is None else list(s.pair),
                    "frame": _frame_key_to_json(s.frame),
                    "basis": s.basis.to_dict(),
                    "models": [g.to_dict() for g in s.models],
                    "pooled_covariance": None
                    if s.pooled_covariance is None
                    else s.pooled_covariance.tolist(),
                }
                for s in self.spaces
            ],
            "registration": dict(self.registration),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Classifier":
        bases = {_frame_key_from_json(k): srvf_from_dict(b) for k, b in d["bases"]}
        spaces = []
        for s in d["spaces"]:
            basis = PcBasis.from_dict(s["basis"])
            pooled = s["pooled_covariance"]
            spaces.append(
                PairwiseSpace(
                    None if s["pair"] is None else tuple(s["pair"]),
                    _frame_key_from_json(s["frame"]),
                    basis,
                    tuple(GaussianClassModel.from_dict(g) for g in s["models"]),
                    None if pooled is None else np.asarray(pooled, dtype=float).reshape(basis.r, basis.r),
                )
            )
        return cls(ClassifierSpec(**d["spec"]), tuple(d["classes"]), bases, tuple(spaces), d.get("registration", {}))

    def save(self, path) -> None:
        save_json(self.to_dict(), path, "classifier")

    @classmethod
    def load(cls, path) -> "Classifier":
        return cls.from_dict(load_json(path, "classifier"))


def _space(pair, frame: ProjectionFrame, rows_mask, classes, spec: ClassifierSpec) -> PairwiseSpace:
    V = frame.rows[rows_mask]
    if spec.r > min(len(V) - 1, V.shape[1]):
        raise ClassifierError(f"r = {spec.r} exceeds the {len(V) - 1} available components")
    basis = tpca(V, spec.r, base=frame.base, center=True)
    coords = pc_coords(frame.rows, basis).coords
    models = tuple(fit_gaussian(coords[frame.labels == k], k) for k in classes)
    pooled = pooled_covariance(models) if spec.model == "LDA" else None
    return PairwiseSpace(pair, frame.key, basis, models, pooled)


def train_from_frames(frames: dict, spec: ClassifierSpec, registration: Optional[dict] = None) -> Classifier:
    """Fit PC bases and Gaussian models on precomputed projection frames."""
    any_frame = next(iter(frames.values()))
    labels = any_frame.labels
    classes = _check_training(labels)
    spaces = []
    if spec.pc_scope == "single":
        frame = frames["all"]
        spaces.append(_space(None, frame, np.ones(len(labels), dtype=bool), classes, spec))
    else:
        for i, j in combinations(classes, 2):
            frame = frames["all"] if spec.projection == "single" else frames[(i, j)]
            mask = (labels == i) | (labels == j)
            spaces.append(_space((i, j), frame, mask, classes, spec))
    used = {s.frame for s in spaces}
    bases = {k: f.base for k, f in frames.items() if k in used}
    return Classifier(spec, tuple(classes), bases, tuple(spaces), dict(registration or {}))


def train(
    shapes: Sequence[Srvf],
    labels: Sequence[int],
    spec: ClassifierSpec,
    mean_config: Optional[MeanConfig] = None,
) -> Classifier:
    """Train an SS, SP or PP classifier on labeled, balanced SRVFs."""
    mean_config = mean_config or MeanConfig()
    frames = build_frames(shapes, labels, spec.projection, mean_config)
    return train_from_frames(frames, spec, mean_config.registration)


# --- decisions --------------------------------------------------------------

@dataclass(frozen=True)
class ClassificationResult:
    predicted: int
    scores: dict
    trace: tuple = ()
    stage_scores: tuple = ()
    excluded: tuple = ()


def _argmax_smallest(classes, values) -> int:
    best = max(values)
    return min(c for c, v in zip(classes, values) if v == best)


def _argmin_largest(classes, values) -> int:
    worst = min(values)
    return max(c for c, v in zip(classes, values) if v == worst)


def space_scores(clf: Classifier, frame_rows: dict) -> np.ndarray:
    """(n, M, K) log-likelihoods given tangent rows per frame key.

    Spaces whose frame has no rows for a sample (NaN) stay NaN.
    """
    first = next(iter(frame_rows.values()))
    n = first.shape[0]
    out = np.full((n, len(clf.spaces), len(clf.classes)), np.nan)
    for s, space in enumerate(clf.spaces):
        rows = frame_rows[space.frame]
        ok = np.all(np.isfinite(rows), axis=1)
        if np.any(ok):
            coords = pc_coords(rows[ok], space.basis).coords
            out[ok, s, :] = space.scores(coords, clf.spec.model)
    return out


def decide(clf: Classifier, scores: np.ndarray) -> ClassificationResult:
    """Aggregate one sample's (M, K) score matrix according to the spec."""
    classes = list(clf.classes)
    valid = np.all(np.isfinite(scores), axis=1)
    excluded = tuple(clf.spaces[s].pair or "all" for s in np.flatnonzero(~valid))
    if not np.any(valid):
        raise ClassifierError("the sample could not be projected into any space")
    mean_all = scores[valid].mean(axis=0)
    agg = {c: float(v) for c, v in zip(classes, mean_all)}
    if clf.spec.decision == "one_shot":
        return ClassificationResult(_argmax_smallest(classes, mean_all.tolist()), agg, (), (agg,), excluded)
    alive = list(classes)
    trace, stages = [], []
    while len(alive) > 1:
        sel = [
            s for s, sp in enumerate(clf.spaces)
            if valid[s] and sp.pair[0] in alive and sp.pair[1] in alive
        ]
        if not sel:
            raise ClassifierError("no valid pairwise space left for the surviving classes")
        cols = [classes.index(c) for c in alive]
        stage = scores[np.ix_(sel, cols)].mean(axis=0)
        stages.append({c: float(v) for c, v in zip(alive, stage)})
        drop = _argmin_largest(alive, stage.tolist())
        trace.append(drop)
        alive.remove(drop)
    return ClassificationResult(alive[0], agg, tuple(trace), tuple(stages), excluded)


def project_for(clf: Classifier, shapes: Sequence[Srvf]) -> dict:
    """Tangent rows of new shapes at every projection point of ``clf`` (NaN on failure)."""
    out = {}
    for key, base in clf.bases.items():
        rows = np.full((len(shapes), 2 * base.m), np.nan)
        for i, q in enumerate(shapes):
            try:
                al = align(base, q, **clf.registration)
                rows[i] = log_map(base, al.apply(q)).flat()
            except ManifoldError:
                log.warning("shape %d is antipodal to projection point %s; space excluded", i, key)
        out[key] = rows
    return out


def classify_many(clf: Classifier, shapes: Sequence[Srvf], rows: Optional[dict] = None) -> list:
    rows = rows if rows is not None else project_for(clf, shapes)
    rows = {k: rows[k] for k in clf.bases}
    sc = space_scores(clf, rows)
    return [decide(clf, sc[i]) for i in range(sc.shape[0])]


def classify_os(x: Srvf, clf: Classifier) -> ClassificationResult:
    """One-shot decision: argmax of the mean log-likelihood over all spaces."""
    if clf.spec.decision != "one_shot":
        clf = Classifier(
            ClassifierSpec(clf.spec.projection, clf.spec.pc_scope, "one_shot", clf.spec.model, clf.spec.r),
            clf.classes, clf.bases, clf.spaces, clf.registration,
        )
    return classify_many(clf, [x])[0]


def classify_rec(x: Srvf, clf: Classifier) -> ClassificationResult:
    """Recursive decision: repeatedly drop the class with the lowest mean score."""
    if clf.spec.pc_scope != "pairwise":
        raise ClassifierError("recursive decisions need pairwise PC spaces")
    if clf.spec.decision != "recursive":
        clf = Classifier(
            ClassifierSpec(clf.spec.projection, clf.spec.pc_scope, "recursive", clf.spec.model, clf.spec.r),
            clf.classes, clf.bases, clf.spaces, clf.registration,
        )
    return classify_many(clf, [x])[0]


def classify(x: Srvf, clf: Classifier) -> ClassificationResult:
    return classify_many(clf, [x])[0]


def write_predictions(path, clf: Classifier, results, shape_ids, true_labels) -> None:
    """CSV ``shape_id,true_label,predicted,stage_trace,score_<class>...``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["shape_id", "true_label", "predicted", "stage_trace"] + [f"score_{c}" for c in clf.classes])
        for sid, y, res in zip(shape_ids, true_labels, results):
            w.writerow(
                [sid, "" if y is None else int(y), res.predicted, ";".join(str(c) for c in res.trace)]
                + [f"{res.scores[c]:.10g}" for c in clf.classes]
            )
