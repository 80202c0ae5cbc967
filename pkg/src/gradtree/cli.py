"""Command-line interface.

Subcommands: synth, train, predict, evaluate, sweep, bench. Exit codes:
0 success, 1 usage error, 2 data error (unreadable/invalid inputs),
3 internal error. Every failure prints exactly one line to stderr of
the form "gradtree: <kind> error: <message>". Outputs are byte-stable
under a fixed seed; GRADTREE_THREADS caps harness worker threads
without changing results.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import builder, harness, model_io, survival
from .baselines import BaselineConfig
from .data import CsvSchema, Dataset, SynthSpec, generate_synthetic, load_csv, save_csv
from .errors import CsvFormatError, GradTreeError, NumericalError
from .metrics import MetricReport, c_index, concordance_counts, r2, roc_auc

SWEEP_COLUMNS = ["learner", "lambda", "depth", "fold", "metric", "value"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(value: float) -> str:
    return repr(float(value))


def _schema_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--target", default="y", help="target column (regression/classification)")
    p.add_argument("--time-col", default="time", help="event time column (survival)")
    p.add_argument("--event-col", default="event", help="event indicator column (survival)")


def _load(path: str, task: str, args) -> Dataset:
    schema = CsvSchema(
        task=task, target=args.target, time_col=args.time_col, event_col=args.event_col
    )
    return load_csv(path, schema)


def _build_parser() -> _Parser:
    parser = _Parser(prog="gradtree", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--kind", required=True, help="friedman1/2/3, strong_interactions, sparse_features, nonlinear")
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--task", choices=["regression", "survival"], default="regression")
    p.add_argument(
        "--weibull-k",
        type=float,
        default=None,
        help="draw noisy event times with this Weibull shape; regression default is noiseless targets, survival default k=5",
    )
    p.add_argument("--event-prob", type=float, default=0.8, help="P(event observed) for survival")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="fit a tree and save it as JSON")
    p.add_argument("data")
    p.add_argument("--task", choices=["regression", "classification", "survival"], required=True)
    p.add_argument("--learner", default="gradtree", help="gradtree, cart, ert, or surv_tree")
    p.add_argument("--loss", choices=["se", "ce", "gce"], default=None, help="gradtree loss (defaults to the task's loss)")
    p.add_argument("--max-depth", type=int, default=5)
    p.add_argument("--min-samples-split", type=int, default=6)
    p.add_argument("--min-samples-leaf", type=int, default=3)
    p.add_argument("--lambda", dest="lambda_", type=float, default=0.0)
    p.add_argument("--learning-rate", type=float, default=1.0)
    p.add_argument("--threshold-mode", choices=["exhaustive", "random"], default="exhaustive")
    p.add_argument("--n-guess", type=int, default=32)
    p.add_argument("--init", choices=["zeros", "km"], default="zeros", help="survival logit initialization")
    p.add_argument("--leaf-mode", choices=["adjusted_value", "kaplan_meier"], default="adjusted_value")
    p.add_argument("--prior-eps", type=float, default=1e-6)
    p.add_argument("--ert-candidates", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    _schema_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="predict with a saved model")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("-o", "--output", default=None, help="CSV destination (default stdout)")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="score a saved model on a dataset")
    p.add_argument("model")
    p.add_argument("data")
    _schema_flags(p)
    p.add_argument("-o", "--output", default=None, help="JSON destination (default stdout)")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("sweep", help="cross-validated depth sweep over learners")
    p.add_argument("data")
    p.add_argument("--task", choices=["regression", "classification", "survival"], required=True)
    p.add_argument("--learners", required=True, help="comma list, e.g. cart,ert,gradtree:0.1,gradtree:0.5")
    p.add_argument("--depths", required=True, help="inclusive range lo:hi or comma list")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-samples-split", type=int, default=6)
    p.add_argument("--min-samples-leaf", type=int, default=3)
    p.add_argument("--learning-rate", type=float, default=1.0)
    p.add_argument("--threshold-mode", choices=["exhaustive", "random"], default="exhaustive")
    p.add_argument("--n-guess", type=int, default=32)
    p.add_argument("--init", choices=["zeros", "km"], default="zeros")
    p.add_argument("--leaf-mode", choices=["adjusted_value", "kaplan_meier"], default="adjusted_value")
    p.add_argument("--prior-eps", type=float, default=1e-6)
    p.add_argument("--ert-candidates", type=int, default=1)
    _schema_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("bench", help="single-depth learner comparison table")
    p.add_argument("data")
    p.add_argument("--task", choices=["regression", "classification", "survival"], required=True)
    p.add_argument("--learners", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-samples-split", type=int, default=6)
    p.add_argument("--min-samples-leaf", type=int, default=3)
    p.add_argument("--learning-rate", type=float, default=1.0)
    p.add_argument("--threshold-mode", choices=["exhaustive", "random"], default="exhaustive")
    p.add_argument("--n-guess", type=int, default=32)
    p.add_argument("--init", choices=["zeros", "km"], default="zeros")
    p.add_argument("--leaf-mode", choices=["adjusted_value", "kaplan_meier"], default="adjusted_value")
    p.add_argument("--prior-eps", type=float, default=1e-6)
    p.add_argument("--ert-candidates", type=int, default=1)
    _schema_flags(p)
    p.add_argument("-o", "--output", default=None, help="CSV destination (default stdout)")
    p.set_defaults(func=_cmd_bench)

    return parser


def _cmd_synth(args) -> int:
    spec = SynthSpec(
        kind=args.kind,
        n_samples=args.n,
        weibull_k=args.weibull_k if args.weibull_k is not None else 5.0,
        censor_event_prob=args.event_prob,
        rng_seed=args.seed,
    )
    try:
        spec.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sample = generate_synthetic(spec)
    if args.task == "survival":
        dataset = sample.survival_dataset()
    else:
        dataset = sample.regression_dataset(observed=args.weibull_k is not None)
    save_csv(dataset, args.output)
    return 0


def _make_tree_config(args) -> builder.TreeConfig:
    return builder.TreeConfig(
        max_depth=args.max_depth,
        min_samples_split=args.min_samples_split,
        min_samples_leaf=args.min_samples_leaf,
        lambda_=args.lambda_,
        learning_rate=args.learning_rate,
        threshold_mode=args.threshold_mode,
        n_guess=args.n_guess,
        leaf_mode=args.leaf_mode,
        rng_seed=args.seed,
    )


_TASK_LOSS = {"regression": "se", "classification": "ce", "survival": "gce"}


def _cmd_train(args) -> int:
    learner = args.learner
    known = (harness.GRADIENT_LEARNER,) + harness.BASELINE_LEARNERS
    if learner not in known:
        raise UsageError(f"unknown learner {learner!r}; choose from {', '.join(known)}")
    if learner == "gradtree" and args.loss is not None and args.loss != _TASK_LOSS[args.task]:
        raise UsageError(
            f"loss {args.loss!r} does not fit task {args.task!r} (expected {_TASK_LOSS[args.task]!r})"
        )
    if learner in ("cart", "ert") and args.task == "survival":
        raise UsageError(f"{learner} does not handle survival data; use surv_tree")
    if learner == "surv_tree" and args.task != "survival":
        raise UsageError("surv_tree only handles survival data")
    try:
        tree_config = _make_tree_config(args) if learner == "gradtree" else None
        baseline_config = (
            None
            if learner == "gradtree"
            else BaselineConfig(
                algorithm="surv_tree" if learner == "surv_tree" else f"{learner}_{args.task}",
                max_depth=args.max_depth,
                min_samples_split=args.min_samples_split,
                min_samples_leaf=args.min_samples_leaf,
                ert_candidates=args.ert_candidates,
                rng_seed=args.seed,
            )
        )
        if tree_config is not None:
            tree_config.validate()
        if baseline_config is not None:
            baseline_config.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    dataset = _load(args.data, args.task, args)
    tree = harness.train_tree(
        dataset,
        learner,
        tree_config=tree_config,
        baseline_config=baseline_config,
        init=args.init,
        prior_eps=args.prior_eps,
    )
    tree.meta["feature_names"] = list(dataset.feature_names)
    model_io.save_model(tree, args.output)
    return 0


def _read_feature_matrix(path: str, feature_names: list) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CsvFormatError(f"{path}: file is empty") from None
        rows = list(reader)
    missing = [name for name in feature_names if name not in header]
    if missing:
        raise CsvFormatError(f"{path}: missing feature columns {missing}")
    pos = [header.index(name) for name in feature_names]
    X = np.empty((len(rows), len(feature_names)))
    for r, row in enumerate(rows, start=1):
        for j, p in enumerate(pos):
            try:
                X[r - 1, j] = float(row[p])
            except (ValueError, IndexError):
                raise CsvFormatError(
                    f"row {r}, column {feature_names[j]!r}: cannot parse as a number"
                ) from None
    return X


def _cmd_predict(args) -> int:
    tree = model_io.load_model(args.model)
    names = tree.meta.get("feature_names") or [f"x{i + 1}" for i in range(tree.n_features)]
    X = _read_feature_matrix(args.data, names)
    buf = io.StringIO()
    writer = csv.writer(buf)
    if tree.task == "survival":
        risks = survival.predict_risk(tree, X)
        writer.writerow(["risk"])
        for v in risks:
            writer.writerow([_fmt(v)])
    elif tree.task == "classification":
        scores = harness.class_scores(tree, X)
        classes = tree.meta.get("class_values") or list(range(scores.shape[1]))
        writer.writerow([f"p_{c}" for c in classes] + ["prediction"])
        for i in range(scores.shape[0]):
            best = classes[int(np.argmax(scores[i]))]
            writer.writerow([_fmt(v) for v in scores[i]] + [best])
    else:
        pred = tree.predict(X)
        writer.writerow(["prediction"])
        for i in range(pred.shape[0]):
            writer.writerow([_fmt(pred[i, 0])])
    _write_text(args.output, buf.getvalue())
    return 0


def _cmd_evaluate(args) -> int:
    tree = model_io.load_model(args.model)
    dataset = _load(args.data, tree.task, args)
    if tree.task == "regression":
        value = r2(dataset.y, tree.predict(dataset.X).ravel())
        report = MetricReport("r2", float(value), dataset.n_samples)
    elif tree.task == "classification":
        y = _remap_classes(dataset, tree)
        scores = harness.class_scores(tree, dataset.X)
        value = roc_auc(y, scores)
        report = MetricReport("roc_auc", float(value), dataset.n_samples)
    else:
        risks = survival.predict_risk(tree, dataset.X)
        value = c_index(dataset.time, dataset.event, risks)
        _, _, pairs = concordance_counts(dataset.time, dataset.event, risks)
        report = MetricReport(
            "c_index", float(value), dataset.n_samples, extra={"comparable_pairs": pairs}
        )
    text = json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    _write_text(args.output, text)
    return 0


def _remap_classes(dataset: Dataset, tree) -> np.ndarray:
    model_classes = tree.meta.get("class_values")
    if model_classes is None:
        return dataset.y
    data_classes = dataset.class_values or list(range(dataset.n_classes))
    lookup = {str(c): i for i, c in enumerate(model_classes)}
    try:
        remap = np.array([lookup[str(c)] for c in data_classes], dtype=int)
    except KeyError as exc:
        raise CsvFormatError(f"class {exc.args[0]!r} was not seen during training") from None
    return remap[dataset.y]


def _parse_depths(text: str) -> list:
    text = text.strip()
    if ":" in text:
        lo_s, _, hi_s = text.partition(":")
        try:
            lo, hi = int(lo_s), int(hi_s)
        except ValueError:
            raise UsageError(f"bad depth range {text!r}") from None
        if hi < lo:
            raise UsageError("depth range upper bound below lower bound")
        return list(range(lo, hi + 1))
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"bad depth list {text!r}") from None


def _sweep_options(args) -> harness.SweepOptions:
    return harness.SweepOptions(
        min_samples_split=args.min_samples_split,
        min_samples_leaf=args.min_samples_leaf,
        learning_rate=args.learning_rate,
        threshold_mode=args.threshold_mode,
        n_guess=args.n_guess,
        init=args.init,
        leaf_mode=args.leaf_mode,
        prior_eps=args.prior_eps,
        ert_candidates=args.ert_candidates,
    )


def _parse_learners(text: str, task: str):
    try:
        specs = [harness.parse_learner_token(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not specs:
        raise UsageError("no learners given")
    for spec in specs:
        if spec.name in ("cart", "ert") and task == "survival":
            raise UsageError(f"{spec.name} does not handle survival data; use surv_tree")
        if spec.name == "surv_tree" and task != "survival":
            raise UsageError("surv_tree only handles survival data")
    return specs


def _cmd_sweep(args) -> int:
    specs = _parse_learners(args.learners, args.task)
    depths = _parse_depths(args.depths)
    dataset = _load(args.data, args.task, args)
    rows = harness.run_sweep(
        dataset, specs, depths, n_folds=args.folds, seed=args.seed, opts=_sweep_options(args)
    )
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(SWEEP_COLUMNS)
    for name, lam, depth, fold, metric, value in rows:
        writer.writerow(
            [name, "" if lam is None else _fmt(lam), depth, fold, metric, _fmt(value)]
        )
    _write_text(args.output, buf.getvalue())
    return 0


def _cmd_bench(args) -> int:
    specs = _parse_learners(args.learners, args.task)
    dataset = _load(args.data, args.task, args)
    rows = harness.run_bench(
        dataset, specs, args.depth, n_folds=args.folds, seed=args.seed, opts=_sweep_options(args)
    )
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["learner", "lambda", "depth", "metric", "mean", "std", "folds"])
    for name, lam, depth, metric, mean, std, folds in rows:
        writer.writerow(
            [name, "" if lam is None else _fmt(lam), depth, metric, _fmt(mean), _fmt(std), folds]
        )
    _write_text(args.output, buf.getvalue())
    return 0


def _write_text(path, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"gradtree: usage error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"gradtree: internal error: {exc}", file=sys.stderr)
        return 3
    except (GradTreeError, OSError) as exc:
        print(f"gradtree: data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"gradtree: data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"gradtree: internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
