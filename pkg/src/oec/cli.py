"""Command line interface: train, predict, evaluate, synth, compare.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import (
    LinearModel,
    ModelFormatError,
    load_model,
    save_model,
    train_binary,
    train_multiclass,
)
from .data import (
    PRESETS,
    DataError,
    SplitSpec,
    generate_synthetic,
    load_csv,
    parse_features,
    read_csv_table,
    save_csv,
)
from .metrics import METRICS, balanced_accuracy, roc_curve, run_experiment, welch_t_test
from .optimizer import BACKENDS, default_config


class UsageError(Exception):
    pass


def _class_fraction(text: str):
    try:
        key, value = text.split("=", 1)
        return int(key), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected CLASS=FRACTION, got {text!r}") from None


def _write_rows(path, header, rows):
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x: float) -> str:
    return repr(float(x))


def _config_for(n, args):
    if args.alpha < 0:
        raise UsageError("--alpha must be >= 0")
    return default_config(n, backend=args.optimizer, alpha=args.alpha, seed=args.seed)


# ---------------------------------------------------------------------------


def cmd_train(args) -> int:
    data = load_csv(args.data, args.label_col)
    config = _config_for(data.n, args)
    start = time.perf_counter()
    if len(data.class_ids) == 2:
        model = train_binary(data, config)
        members = [model]
        bacc = balanced_accuracy(model.predict_labels(data.features), data.labels)
    else:
        model = train_multiclass(data, config)
        members = list(model.pair_models.values())
        bacc = balanced_accuracy(model.predict(data.features), data.labels)
    elapsed = time.perf_counter() - start
    save_model(model, args.out)
    classes = ",".join(str(c) for c in data.class_ids)
    fitness = min(m.fitness for m in members)
    margin = min(m.margin for m in members)
    print(
        f"classes={classes} n={data.n} lambda={config.population} "
        f"iterations={config.max_iterations} fitness={fitness:.6f} "
        f"train_bacc={bacc:.3f} margin={margin:.6f} pairs={len(members)} "
        f"seed={args.seed} time={elapsed:.3f}s"
    )
    if len(members) > 1:
        for m in members:
            print(
                f"  pair {m.class_ids[0]}-{m.class_ids[1]}: fitness={m.fitness:.6f} "
                f"train_bacc={m.train_performance:.3f} margin={m.margin:.6f}"
            )
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    header, rows = read_csv_table(args.data)
    skip = header.index(args.label_col) if args.label_col in header else None
    features = parse_features(header, rows, skip=skip)
    n_cols = len(header) - (skip is not None)
    if n_cols != model.n:
        raise DataError(f"model expects {model.n} features, data has {n_cols}")
    if isinstance(model, LinearModel):
        out_header = ["row_index", "predicted_label", "decision_value"]
        out_rows = []
        if rows:
            labels = model.predict_labels(features)
            values = model.decision_values(features)
            out_rows = [[i, int(l), _fmt(v)] for i, (l, v) in enumerate(zip(labels, values))]
    else:
        out_header = ["row_index", "predicted_label"] + [f"votes_{c}" for c in model.class_ids]
        out_rows = []
        if rows:
            votes = model.votes(features)
            labels = model.predict(features)
            out_rows = [[i, int(l), *map(int, v)] for i, (l, v) in enumerate(zip(labels, votes))]
    _write_rows(args.out, out_header, out_rows)
    return 0


def cmd_evaluate(args) -> int:
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    if not 0 <= args.noise <= 1:
        raise UsageError("--noise must lie in [0, 1]")
    if args.data:
        data = load_csv(args.data, args.label_col)
    elif args.preset:
        data = generate_synthetic(args.preset, args.n_per_class, seed=args.seed)
    else:
        raise UsageError("evaluate needs --data or --preset")
    try:
        spec = SplitSpec(args.train_frac, dict(args.class_frac) or None, seed=args.seed)
    except DataError as exc:
        raise UsageError(str(exc)) from None
    config = _config_for(data.n, args)
    summary = run_experiment(data, args.runs, spec, config, noise=args.noise)
    summary.to_csv(args.out)
    for metric in METRICS:
        print(f"{metric}: {summary.mean(metric):.4f} +- {summary.std(metric):.4f}")
    print(f"runs={summary.run_count} seed={args.seed}")
    if args.emit_roc:
        last = summary.runs[-1]
        if last.test_scores is None:
            print("warning: --emit-roc is only available for binary data", file=sys.stderr)
        else:
            fpr, tpr = roc_curve(last.test_scores, last.test_labels)
            _write_rows(args.emit_roc, ["fpr", "tpr"], [[_fmt(a), _fmt(b)] for a, b in zip(fpr, tpr)])
    if args.emit_weights:
        rows = [
            [k, p, j, _fmt(w)]
            for k, run in enumerate(summary.runs)
            for p, omega in enumerate(run.weights)
            for j, w in enumerate(omega)
        ]
        _write_rows(args.emit_weights, ["run", "pair", "index", "weight"], rows)
    return 0


def cmd_synth(args) -> int:
    if args.n_per_class < 1:
        raise UsageError("--n-per-class must be >= 1")
    data = generate_synthetic(args.preset, args.n_per_class, seed=args.seed)
    save_csv(data, args.out)
    return 0


def _read_metric(path, metric):
    header, rows = read_csv_table(path)
    if metric not in header:
        raise DataError(f"{path} has no column {metric!r}; columns are {', '.join(header)}")
    j = header.index(metric)
    return np.array([float(row[j]) for row in rows])


def cmd_compare(args) -> int:
    a = _read_metric(args.results_a, args.metric)
    b = _read_metric(args.results_b, args.metric)
    t, p = welch_t_test(a, b)
    print(f"metric={args.metric} mean_a={a.mean():.6f} mean_b={b.mean():.6f}")
    print(f"t={t:.6g} p={p:.6g}")
    print("significant at 0.05" if p < 0.05 else "not significant")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oec", description="Optimal-margin evolutionary linear classifier"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--alpha", type=float, default=0.0, help="L1 weight (default 0)")
        p.add_argument("--optimizer", choices=BACKENDS, default="cmaes")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train", help="train a model from a CSV file")
    p.add_argument("--data", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--out", required=True, help="model file to write")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict labels for a CSV file")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label-col", default="label", help="column to ignore if present")
    p.add_argument("--out", required=True, help="predictions CSV to write")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="repeated stratified hold-out evaluation")
    p.add_argument("--data")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--n-per-class", type=int, default=200)
    p.add_argument("--label-col", default="label")
    p.add_argument("--out", required=True, help="per-run results CSV")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--train-frac", type=float, default=0.7)
    p.add_argument("--class-frac", type=_class_fraction, action="append", default=[],
                   metavar="CLASS=FRACTION")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--emit-roc", metavar="PATH")
    p.add_argument("--emit-weights", metavar="PATH")
    common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--preset", required=True)
    p.add_argument("--n-per-class", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("compare", help="Welch t-test between two results files")
    p.add_argument("results_a")
    p.add_argument("results_b")
    p.add_argument("--metric", default="test_auc")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"oec: error: {exc}", file=sys.stderr)
        return 2
    except (DataError, ModelFormatError, ValueError, OSError, ArithmeticError) as exc:
        print(f"oec: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
