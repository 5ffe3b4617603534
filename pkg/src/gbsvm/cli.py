"""Command-line entry point: ``gbsvm {gen-balls,train,predict,bench-noise,bench-time}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver degeneracy.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import fit_minmax, load_csv, normalize_minmax
from .exceptions import DatasetError, SolverError
from .experiment import (
    DEFAULT_RATES,
    ExperimentConfig,
    run_noise_sweep,
    run_timing_comparison,
    synthetic_benchmark,
)
from .granular_ball import BallGenConfig, export_balls, generate_granular_balls, points_as_balls
from .model import GbsvmModel, margin
from .pso import OBJECTIVES, PsoConfig, solve, write_trace
from .seeding import derive_seed

log = logging.getLogger("gbsvm")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _threads():
    raw = os.environ.get("GBSVM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"GBSVM_THREADS must be an integer, got {raw!r}") from None


def _add_data_args(p, required=True):
    p.add_argument("--input", required=required, help="CSV file")
    p.add_argument("--label-col", default="-1", help="label column index or header name (default: last)")
    p.add_argument("--positive-label", default=None, help="raw label mapped to +1")
    p.add_argument("--no-normalize", action="store_true", help="skip min-max scaling")


def _add_ball_args(p, purity):
    p.add_argument("--purity", type=float, default=purity, help=f"purity threshold T in (0.5, 1] (default {purity})")
    p.add_argument("--radius-mode", choices=["average", "max"], default="average")
    p.add_argument("--min-split-size", type=int, default=2)


def _add_pso_args(p):
    p.add_argument("--C", type=float, default=10.0, help="box bound on the multipliers")
    p.add_argument("--pop", type=int, default=400)
    p.add_argument("--iters", type=int, default=1050)
    p.add_argument("--inertia", type=float, default=0.5)
    p.add_argument("--c1", type=float, default=1.6)
    p.add_argument("--c2", type=float, default=1.6)
    p.add_argument("--patience", type=int, default=25, help="stop after this many non-improving iterations")
    p.add_argument("--objective", choices=sorted(OBJECTIVES), default="exact")


def build_parser():
    parser = _Parser(prog="gbsvm", description="Granular-ball support vector machine")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-balls", help="generate granular balls and export them")
    _add_data_args(p)
    _add_ball_args(p, 0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help=".csv or .json")

    p = sub.add_parser("train", help="fit a GBSVM and write the model as JSON")
    _add_data_args(p)
    _add_ball_args(p, 0.9)
    _add_pso_args(p)
    p.add_argument("--point-svm", action="store_true", help="use every row as a radius-0 ball")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", default=None, help="write a per-iteration convergence CSV here")
    p.add_argument("--model-out", required=True)

    p = sub.add_parser("predict", help="label rows with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--label-col", default=None,
                   help="label column of the input, if present; enables accuracy reporting")
    p.add_argument("--positive-label", default=None)
    p.add_argument("--out", required=True)

    for name, purity, n_default in (("bench-noise", 0.6, 500), ("bench-time", 0.9, 2000)):
        p = sub.add_parser(name, help=("accuracy under label noise" if name == "bench-noise"
                                       else "training time, GBSVM vs point SVM"))
        _add_data_args(p, required=False)
        p.add_argument("--n", type=int, default=n_default, help="synthetic size when --input is omitted")
        _add_ball_args(p, purity)
        _add_pso_args(p)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--train-fraction", type=float, default=0.7)
        if name == "bench-noise":
            p.add_argument("--rates", default=",".join(f"{r:g}" for r in DEFAULT_RATES))
            p.add_argument("--repeats", type=int, default=5)
            p.add_argument("--format", choices=["csv", "json"], default=None,
                           help="default: from --out suffix")
            p.add_argument("--no-timing", action="store_true",
                           help="omit wall-clock columns so reruns are byte-identical")
        p.add_argument("--out", required=True)
    return parser


def _validate(args):
    if hasattr(args, "purity") and not 0.5 < args.purity <= 1.0:
        raise UsageError(f"--purity must lie in (0.5, 1], got {args.purity}")
    if hasattr(args, "min_split_size") and args.min_split_size < 2:
        raise UsageError("--min-split-size must be >= 2")
    if hasattr(args, "C") and not (args.C > 0 and math.isfinite(args.C)):
        raise UsageError(f"--C must be a positive finite number, got {args.C}")
    if hasattr(args, "pop"):
        try:
            PsoConfig(pop=args.pop, max_iter=args.iters, inertia=args.inertia, c1=args.c1, c2=args.c2,
                      ub=args.C, stall_patience=args.patience)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if hasattr(args, "train_fraction") and not 0.0 < args.train_fraction < 1.0:
        raise UsageError("--train-fraction must lie in (0, 1)")
    if hasattr(args, "repeats") and args.repeats < 1:
        raise UsageError("--repeats must be >= 1")


def _pso_config(args, workers):
    return PsoConfig(pop=args.pop, max_iter=args.iters, inertia=args.inertia, c1=args.c1, c2=args.c2,
                     ub=args.C, stall_patience=args.patience, seed=derive_seed(args.seed, "pso"),
                     workers=workers)


def _load(args):
    ds = load_csv(args.input, args.label_col, args.positive_label)
    lo = span = None
    if not args.no_normalize:
        lo, span = fit_minmax(ds.features)
        ds = normalize_minmax(ds)
    return ds, lo, span


def _banner(command, **cfg):
    log.info("gbsvm %s %s", command, json.dumps(cfg, sort_keys=True, default=str))


def cmd_gen_balls(args):
    ds, _, _ = _load(args)
    cfg = BallGenConfig(args.purity, args.radius_mode, args.min_split_size)
    _banner("gen-balls", input=args.input, seed=args.seed, **asdict(cfg))
    balls = generate_granular_balls(ds, cfg)
    export_balls(balls, args.out)
    purities = np.array([b.purity for b in balls])
    print(f"balls: {len(balls)}  points: {ds.n}  min purity: {purities.min():.4f}  "
          f"mean purity: {purities.mean():.4f}  terminal: {sum(b.terminal for b in balls)}")
    return EXIT_OK


def cmd_train(args):
    ds, lo, span = _load(args)
    pso = _pso_config(args, _threads())
    bcfg = BallGenConfig(args.purity, args.radius_mode, args.min_split_size)
    _banner("train", input=args.input, seed=args.seed, point_svm=args.point_svm,
            objective=args.objective, balls=asdict(bcfg), pso=asdict(pso))
    balls = points_as_balls(ds) if args.point_svm else generate_granular_balls(ds, bcfg)
    sol = solve(balls, args.C, pso, trace=args.trace is not None, objective=args.objective)
    if args.trace:
        write_trace(sol.trace, args.trace)
    model = GbsvmModel.from_solution(
        sol, balls,
        purity_threshold=None if args.point_svm else args.purity,
        radius_mode=None if args.point_svm else args.radius_mode,
        feature_min=lo, feature_span=span)
    model.save(args.model_out)
    acc = float(np.mean(model.predict(ds.features) == ds.labels))
    print(f"pop={pso.pop} max_iter={pso.max_iter} iterations={sol.iterations} balls={len(balls)}")
    print(f"|w|={model.norm_w:.6g}  b={model.b:.6g}  margin={margin(model):.6g}  "
          f"support_balls={model.n_support}  train_accuracy={acc:.4f}")
    return EXIT_OK


def _read_predict_input(args, d):
    if args.label_col is not None:
        ds = load_csv(args.input, args.label_col, args.positive_label)
        return ds.features, ds.labels, ds.ids
    with open(args.input, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    try:
        float(rows[0][0])
    except (ValueError, IndexError):
        rows = rows[1:]
    try:
        X = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise DatasetError(f"non-numeric feature value: {exc}") from None
    if X.ndim != 2 or X.shape[1] != d:
        raise DatasetError(f"expected {d} feature columns, got {X.shape[1] if X.ndim == 2 else 0}")
    return X, None, np.arange(len(X))


def cmd_predict(args):
    try:
        model = GbsvmModel.load(args.model)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise DatasetError(f"cannot read model {args.model}: {exc}") from None
    if not Path(args.input).is_file():
        raise FileNotFoundError(f"no such file: {args.input}")
    X, y, ids = _read_predict_input(args, len(model.w))
    pred = model.predict(model.transform(X))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "prediction"])
        for i, p in zip(ids, pred):
            w.writerow([int(i), int(p)])
    msg = f"predicted {len(pred)} rows (+1: {int(np.sum(pred == 1))}, -1: {int(np.sum(pred == -1))})"
    if y is not None:
        msg += f"  accuracy={float(np.mean(pred == y)):.4f}"
    print(msg)
    return EXIT_OK


def _bench_data(args):
    if args.input:
        ds, _, _ = _load(args)
        return ds
    return synthetic_benchmark(args.n, seed=derive_seed(args.seed, "synthetic"))


def _experiment_config(args, **extra):
    return ExperimentConfig(
        train_fraction=args.train_fraction, purity_threshold=args.purity, radius_mode=args.radius_mode,
        C=args.C, pso=_pso_config(args, 1), objective=args.objective, **extra)


def cmd_bench_noise(args):
    try:
        rates = tuple(float(r) for r in args.rates.split(",") if r.strip())
    except ValueError:
        raise UsageError(f"--rates must be comma-separated numbers, got {args.rates!r}") from None
    if not rates or any(not 0.0 <= r <= 1.0 for r in rates):
        raise UsageError("--rates must be non-empty and within [0, 1]")
    seeds = tuple(derive_seed(args.seed, "repeat", i) for i in range(args.repeats))
    cfg = _experiment_config(args, noise_rates=rates, repeats=args.repeats, seeds=seeds)
    ds = _bench_data(args)
    _banner("bench-noise", input=args.input or f"synthetic n={args.n}", **cfg.to_dict())
    report = run_noise_sweep(ds, cfg, workers=_threads())
    fmt = args.format or ("json" if args.out.lower().endswith(".json") else "csv")
    if fmt == "json":
        report.to_json(args.out)
    else:
        report.to_csv(args.out, include_timing=not args.no_timing)
    for row in report.aggregate():
        print(f"{row['dataset']}  rate={row['rate']:.2f}  {row['method']:<5}  "
              f"acc={row['mean_accuracy']:.4f}  units={row['mean_units']:.1f}  time={row['mean_seconds']:.3f}s")
    return EXIT_OK


def cmd_bench_time(args):
    cfg = _experiment_config(args)
    ds = _bench_data(args)
    _banner("bench-time", input=args.input or f"synthetic n={args.n}", **cfg.to_dict())
    rep = run_timing_comparison(ds, cfg, seed=args.seed)
    doc = rep.to_dict()
    Path(args.out).write_text(json.dumps(doc, indent=2), encoding="utf-8")
    print(f"{rep.dataset}: points={rep.n_points} balls={rep.n_balls}  "
          f"GBSVM {rep.gbsvm_seconds:.3f}s  SVM {rep.svm_seconds:.3f}s  speedup x{rep.speedup:.1f}")
    return EXIT_OK


COMMANDS = {
    "gen-balls": cmd_gen_balls,
    "train": cmd_train,
    "predict": cmd_predict,
    "bench-noise": cmd_bench_noise,
    "bench-time": cmd_bench_time,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        _validate(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gbsvm: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, DatasetError) as exc:
        print(f"gbsvm: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverError as exc:
        print(f"gbsvm: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        # e.g. single-class training data reaching the solver
        print(f"gbsvm: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
