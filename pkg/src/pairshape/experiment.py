"""Random-split experiments over classifier specs and result tables."""
from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .classify import (
    METHODS,
    MODELS,
    ClassifierError,
    ClassifierSpec,
    build_frames,
    classify_many,
    tangent_rows,
    train_from_frames,
)
from .curves import DEFAULT_M, PlanarCurve, preprocess, to_srvf
from .io import load_outlines
from .manifold import MeanConfig

log = logging.getLogger(__name__)

TABLE_HEADER = ["method", "model", "r", "mean_rate", "stderr", "n_splits"]


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: Optional[str] = None
    m: int = DEFAULT_M
    methods: tuple = METHODS
    models: tuple = MODELS
    r_values: tuple = (8,)
    splits: int = 25
    train_per_class: int = 40
    seed: int = 0
    threads: int = 1
    average_over_r: bool = False
    mean: MeanConfig = field(default_factory=MeanConfig)

    def __post_init__(self):
        if self.splits < 1:
            raise ValueError("splits must be at least 1")
        if self.train_per_class < 2:
            raise ValueError("train_per_class must be at least 2")
        if not self.r_values or any(int(r) < 1 for r in self.r_values):
            raise ValueError("r values must be positive")
        for meth in self.methods:
            ClassifierSpec.from_method(meth)
        for mod in self.models:
            if mod.upper() not in MODELS:
                raise ValueError(f"unknown model {mod!r}")


@dataclass
class ResultTable:
    """Misclassification percentages keyed by (method, model, r)."""

    rates: dict = field(default_factory=dict)
    average_over_r: bool = False

    def add(self, method: str, model: str, r, rate_percent: float):
        self.rates.setdefault((method, model, r), []).append(rate_percent)

    def rows(self) -> list[dict]:
        rates = self.rates
        if self.average_over_r:
            grouped: dict = {}
            for (meth, mod, r), vals in rates.items():
                grouped.setdefault((meth, mod), {})[r] = vals
            rates = {}
            for (meth, mod), per_r in grouped.items():
                rs = sorted(per_r)
                per_split = np.mean([per_r[r] for r in rs], axis=0)
                rates[(meth, mod, f"{rs[0]}-{rs[-1]}" if len(rs) > 1 else rs[0])] = list(per_split)
        out = []
        for meth, mod, r in sorted(rates, key=_row_order):
            vals = np.asarray(rates[(meth, mod, r)], dtype=float)
            se = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
            out.append(
                {"method": meth, "model": mod, "r": r, "mean_rate": float(vals.mean()),
                 "stderr": se, "n_splits": len(vals)}
            )
        return out

    def mean_rate(self, method: str, model: str, r) -> float:
        return float(np.mean(self.rates[(method, model, r)]))


def _row_order(key):
    meth, mod, r = key
    r_key = int(str(r).split("-")[0])
    return (METHODS.index(meth), MODELS.index(mod), r_key)


def emit_table(table: ResultTable, path) -> None:
    """CSV with columns method,model,r,mean_rate,stderr,n_splits; rates in percent."""
    rows = table.rows()
    if not rows:
        raise ValueError("cannot emit an empty result table")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_HEADER)
        for row in rows:
            w.writerow([row["method"], row["model"], row["r"], f"{row['mean_rate']:.4f}",
                        f"{row['stderr']:.4f}", row["n_splits"]])


def make_splits(labels: Sequence[int], train_per_class: int, splits: int, seed) -> list:
    """Balanced random train/test index partitions, one per split."""
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    for c, n in zip(classes, counts):
        if n < train_per_class + 1:
            raise ClassifierError(
                f"class {int(c)} has {int(n)} samples; need at least {train_per_class + 1} "
                f"for {train_per_class} training shapes and one test shape"
            )
    out = []
    for ss in np.random.SeedSequence(seed).spawn(splits):
        rng = np.random.default_rng(ss)
        train = []
        for c in classes:
            idx = np.flatnonzero(labels == c)
            train.extend(rng.permutation(idx)[:train_per_class].tolist())
        train = np.sort(np.array(train))
        test = np.setdiff1d(np.arange(len(labels)), train)
        out.append((train, test))
    return out


def run_split(srvfs, labels, train_idx, test_idx, config: ExperimentConfig, split_no: int = 0) -> list:
    """Rates (percent) for every (method, model, r) on one split."""
    t0 = time.perf_counter()
    labels = np.asarray(labels)
    tr_shapes = [srvfs[i] for i in train_idx]
    te_shapes = [srvfs[i] for i in test_idx]
    tr_labels, te_labels = labels[train_idx], labels[test_idx]
    specs = [ClassifierSpec.from_method(m, mod, r) for m in config.methods for mod in config.models
             for r in config.r_values]
    frames = {}
    if any(s.projection == "single" for s in specs):
        frames.update(build_frames(tr_shapes, tr_labels, "single", config.mean))
    if any(s.projection == "pairwise" for s in specs):
        frames.update(build_frames(tr_shapes, tr_labels, "pairwise", config.mean))
    t_means = time.perf_counter() - t0
    reg = config.mean.registration
    rows = {k: tangent_rows(f.base, te_shapes, reg) for k, f in frames.items()}
    out = []
    for spec in specs:
        sub = {k: v for k, v in frames.items() if (k == "all") == (spec.projection == "single")}
        clf = train_from_frames(sub, spec, reg)
        preds = np.array([res.predicted for res in classify_many(clf, te_shapes, rows)])
        out.append((spec.method, spec.model, spec.r, 100.0 * float(np.mean(preds != te_labels))))
    log.info("split %d: means %.1fs, total %.1fs", split_no, t_means, time.perf_counter() - t0)
    return out


def prepare(curves: Sequence[PlanarCurve], m: int):
    """Resample and convert labeled curves; returns (srvfs, labels, shape ids)."""
    missing = [c.shape_id for c in curves if c.label is None]
    if missing:
        raise ClassifierError(f"shape {missing[0]!r} has no label")
    srvfs = [to_srvf(preprocess(c, m)) for c in curves]
    return srvfs, np.array([c.label for c in curves]), [c.shape_id for c in curves]


def run_experiment(config: ExperimentConfig, curves: Optional[Sequence[PlanarCurve]] = None) -> ResultTable:
    """Repeat balanced random splits and tabulate misclassification rates."""
    if curves is None:
        if config.dataset is None:
            raise ValueError("no dataset given")
        curves = load_outlines(config.dataset)
    srvfs, labels, _ = prepare(curves, config.m)
    parts = make_splits(labels, config.train_per_class, config.splits, config.seed)

    def job(item):
        k, (tr, te) = item
        return run_split(srvfs, labels, tr, te, config, k)

    items = list(enumerate(parts))
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(job, items))
    else:
        results = [job(it) for it in items]
    table = ResultTable(average_over_r=config.average_over_r)
    for res in results:
        for meth, mod, r, rate in res:
            table.add(meth, mod, r, rate)
    return table
