"""Command-line driver: ingest, register, mean, train, classify, experiment, simulate."""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .classify import METHODS, Classifier, ClassifierError, ClassifierSpec, classify_many, train, write_predictions
from .curves import DEFAULT_M, CurveError, PlanarCurve, from_srvf, preprocess, to_srvf
from .experiment import ExperimentConfig, emit_table, prepare, run_experiment
from .io import OutlineFormatError, load_outlines, save_json, write_outlines
from .manifold import ManifoldError, MeanConfig, karcher_mean
from .registration import RegistrationError, geodesic_path, register
from .simulation import (
    SimConfig,
    run_method_comparison,
    run_q_sensitivity,
    write_method_comparison,
    write_q_sensitivity,
)
from .synthetic import circles_and_squares, outgroup_benchmark

log = logging.getLogger("pairshape")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
CONFIG_SECTION = "pairshape"
SYNTHETIC = {"outgroup": outgroup_benchmark, "circles-squares": circles_and_squares}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _common(p: argparse.ArgumentParser, dataset: bool = True):
    if dataset:
        p.add_argument("--dataset", help="outline CSV file (or directory with --format txt)")
        p.add_argument("--format", choices=("csv", "txt"), default="csv")
        p.add_argument("--open", action="store_true", help="treat outlines as open curves")
        p.add_argument("--synthetic", choices=sorted(SYNTHETIC), help="use a built-in synthetic dataset")
        p.add_argument("--per-class", type=int, default=30, help="shapes per class for --synthetic")
    p.add_argument("--m", type=int, default=DEFAULT_M, help="sample points per curve")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed-stride", type=int, default=1, help="start-point search stride (closed curves)")
    p.add_argument("--seed-candidates", type=int, default=None,
                   help="keep only this many start points after a rotation-only prescreen")
    p.add_argument("--no-polish", action="store_true", help="skip local refinement of DP warps")
    p.add_argument("--mean-tol", type=float, default=1e-5)
    p.add_argument("--mean-max-iter", type=int, default=50)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pairshape", description=__doc__)
    parser.add_argument("--config", help="INI file with a [pairshape] section of flag defaults")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="resample and normalize outlines")
    _common(p)

    p = sub.add_parser("register", help="register two shapes and report their distance")
    _common(p)
    p.add_argument("--shapes", nargs=2, required=True, metavar=("ID1", "ID2"))
    p.add_argument("--steps", type=int, default=10, help="geodesic steps written to --out")

    p = sub.add_parser("mean", help="Karcher mean of a dataset or of one class")
    _common(p)
    p.add_argument("--label", type=int, help="restrict to one class")

    for name, helptext in (("train", "train a classifier"), ("classify", "classify shapes with a trained model")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--method", default="PP-OS", help=f"one of {', '.join(METHODS)}")
        p.add_argument("--model", default="QDA", choices=("LDA", "QDA", "lda", "qda"))
        p.add_argument("--r", default="8")
        if name == "classify":
            p.add_argument("--classifier", required=True, help="model file written by 'train'")

    p = sub.add_parser("experiment", help="random-split misclassification table")
    _common(p)
    p.add_argument("--method", default=",".join(METHODS), help="comma-separated methods")
    p.add_argument("--model", default="LDA,QDA", help="comma-separated models")
    p.add_argument("--r", default="8", help="comma list or range, e.g. 2-10")
    p.add_argument("--splits", type=int, default=25)
    p.add_argument("--train-per-class", type=int, default=40)
    p.add_argument("--average-over-r", action="store_true")

    p = sub.add_parser("simulate", help="one-dimensional t-distribution study")
    _common(p, dataset=False)
    p.add_argument("--study", choices=("q", "methods", "both"), default="both")
    p.add_argument("--n", type=int, default=20_000, help="samples per class")
    p.add_argument("--mus", default="0,2,6")
    p.add_argument("--nu", type=float, default=5.0)
    p.add_argument("--replicates", type=int, default=50)
    return parser


def _apply_config(parser, argv):
    """Re-parse with defaults taken from the --config file (flags still win)."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    cp = configparser.ConfigParser()
    if not cp.read(args.config):
        raise OutlineFormatError(f"cannot read config file {args.config}")
    if not cp.has_section(CONFIG_SECTION):
        raise OutlineFormatError(f"{args.config}: missing [{CONFIG_SECTION}] section")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in cp.items(CONFIG_SECTION):
        dest = key.replace("-", "_")
        if dest not in known:
            continue
        action = known[dest]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[dest] = cp.getboolean(CONFIG_SECTION, key)
        elif action.type is not None:
            defaults[dest] = action.type(value)
        else:
            defaults[dest] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _registration(args) -> dict:
    reg = {"seed_stride": args.seed_stride, "polish": not args.no_polish}
    if args.seed_candidates is not None:
        reg["seed_candidates"] = args.seed_candidates
    return reg


def _mean_config(args) -> MeanConfig:
    return MeanConfig(tol=args.mean_tol, max_iter=args.mean_max_iter, seed=args.seed,
                      threads=args.threads, registration=_registration(args))


def _curves(args):
    if args.synthetic:
        return SYNTHETIC[args.synthetic](args.per_class, seed=args.seed)
    if not args.dataset:
        raise UsageError("--dataset or --synthetic is required")
    return load_outlines(args.dataset, args.format, closed=not args.open)


def _need_out(args) -> Path:
    if not args.out:
        raise UsageError("--out is required")
    return Path(args.out)


def cmd_ingest(args):
    curves = [preprocess(c, args.m) for c in _curves(args)]
    if args.out:
        write_outlines(curves, args.out)
    print(f"{len(curves)} curves, {len({c.label for c in curves})} classes, m={args.m}")


def cmd_register(args):
    curves = {c.shape_id: c for c in _curves(args)}
    for sid in args.shapes:
        if sid not in curves:
            raise OutlineFormatError(f"shape {sid!r} not found in the dataset")
    q1, q2 = (to_srvf(preprocess(curves[s], args.m)) for s in args.shapes)
    al = register(q1, q2, **_registration(args))
    print(f"distance {al.distance:.6f} seed_shift {al.seed_shift} "
          f"rotation {np.degrees(np.arctan2(al.rotation[1, 0], al.rotation[0, 0])):.3f}")
    if args.out:
        path = geodesic_path(q1, al.apply(q2), args.steps)
        steps = [PlanarCurve(from_srvf(q).points, q1.closed, None, f"step{k:03d}") for k, q in enumerate(path)]
        write_outlines(steps, args.out)


def cmd_mean(args):
    curves = _curves(args)
    if args.label is not None:
        curves = [c for c in curves if c.label == args.label]
        if len(curves) < 2:
            raise OutlineFormatError(f"class {args.label} has fewer than 2 shapes")
    shapes = [to_srvf(preprocess(c, args.m)) for c in curves]
    t0 = time.perf_counter()
    km = karcher_mean(shapes, _mean_config(args))
    print(f"{len(shapes)} shapes, {km.iterations} iterations, status {km.status}, "
          f"|v| {km.final_gradient_norm:.3g}, objective {km.objective_history[-1]:.6g} "
          f"({time.perf_counter() - t0:.1f}s)")
    if args.out:
        save_json(km.to_dict(), args.out, "karcher_mean")


def _single_r(text) -> int:
    rs = _int_list(text)
    if len(rs) != 1:
        raise UsageError("--r takes a single value here")
    return rs[0]


def _spec(method: str, model: str, r: int) -> ClassifierSpec:
    try:
        return ClassifierSpec.from_method(method, model.upper(), r)
    except ClassifierError as exc:
        raise UsageError(str(exc)) from None


def cmd_train(args):
    out = _need_out(args)
    spec = _spec(args.method, args.model, _single_r(args.r))
    srvfs, labels, _ = prepare(_curves(args), args.m)
    clf = train(srvfs, labels, spec, _mean_config(args))
    clf.save(out)
    print(f"trained {spec.method} {spec.model} r={spec.r} on {len(srvfs)} shapes, "
          f"{len(clf.spaces)} PC spaces, {len(clf.bases)} projection points")


def cmd_classify(args):
    out = _need_out(args)
    clf = Classifier.load(args.classifier)
    curves = _curves(args)
    srvfs = [to_srvf(preprocess(c, args.m)) for c in curves]
    if srvfs and srvfs[0].m != next(iter(clf.bases.values())).m:
        raise UsageError("--m must match the grid size of the trained model")
    results = classify_many(clf, srvfs)
    ids = [c.shape_id for c in curves]
    truth = [c.label for c in curves]
    write_predictions(out, clf, results, ids, truth)
    known = [(y, r.predicted) for y, r in zip(truth, results) if y is not None]
    if known:
        err = np.mean([y != p for y, p in known])
        print(f"{len(results)} shapes classified, misclassification {100 * err:.4f}%")
    else:
        print(f"{len(results)} shapes classified")


def cmd_experiment(args):
    out = _need_out(args)
    methods = tuple(m.strip().upper() for m in args.method.split(",") if m.strip())
    models = tuple(m.strip().upper() for m in args.model.split(",") if m.strip())
    for meth in methods:
        _spec(meth, "QDA", 1)
    cfg = ExperimentConfig(
        dataset=args.dataset, m=args.m, methods=methods, models=models, r_values=tuple(_int_list(args.r)),
        splits=args.splits, train_per_class=args.train_per_class, seed=args.seed, threads=args.threads,
        average_over_r=args.average_over_r, mean=_mean_config(args),
    )
    table = run_experiment(cfg, _curves(args))
    emit_table(table, out)
    print(f"{len(table.rows())} rows written to {out}")


def cmd_simulate(args):
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    mus = tuple(float(x) for x in args.mus.split(","))
    cfg = SimConfig(mus=mus, nu=args.nu, n=args.n, seed=args.seed, threads=args.threads)
    summary = {}
    if args.study in ("q", "both"):
        res = run_q_sensitivity(cfg)
        write_q_sensitivity(res, out / "q_sensitivity.csv")
        summary["aggregated_pairwise_rate"] = res.aggregated_pairwise_rate
        summary["overall_mean_rate"] = res.overall_mean_rate
    if args.study in ("methods", "both"):
        res = run_method_comparison(cfg, args.replicates)
        write_method_comparison(res, out / "method_comparison.csv")
        summary["mean_excess_i_ii_iii"] = [float(v) for v in res.excess.mean(axis=0)]
    print(json.dumps(summary))


COMMANDS = {
    "ingest": cmd_ingest,
    "register": cmd_register,
    "mean": cmd_mean,
    "train": cmd_train,
    "classify": cmd_classify,
    "experiment": cmd_experiment,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(
            level=logging.WARNING - 10 * min(args.verbose, 2),
            format="%(asctime)s %(name)s %(message)s",
            stream=sys.stderr,
        )
        COMMANDS[args.command](args)
        return EXIT_OK
    except UsageError as exc:
        print(f"pairshape: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OutlineFormatError, CurveError, ClassifierError, OSError) as exc:
        print(f"pairshape: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (RegistrationError, ManifoldError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"pairshape: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"pairshape: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
