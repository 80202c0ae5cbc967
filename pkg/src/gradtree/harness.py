"""Cross-validated comparisons of the learners in this package.

The harness grows one tree per (learner, depth, fold) cell over a shared
fold assignment, scores it with the task's metric (R^2, ROC-AUC, or
C-index), and emits plot-ready rows. Cells are independent: each gets a
seed derived from the base seed by cell position, work may be spread
over GRADTREE_THREADS worker threads, and rows are sorted before they
are returned, so results are identical byte for byte no matter how many
threads ran.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import baselines, builder, metrics, survival
from .data import Dataset, kfold_split
from .losses import CrossEntropyLoss, SquaredErrorLoss, softmax
from .tree import Tree

GRADIENT_LEARNER = "gradtree"
BASELINE_LEARNERS = ("cart", "ert", "surv_tree")
METRIC_BY_TASK = {"regression": "r2", "classification": "roc_auc", "survival": "c_index"}


@dataclass(frozen=True)
class LearnerSpec:
    name: str
    lambda_: Optional[float] = None


def parse_learner_token(token: str) -> LearnerSpec:
    """Parse CLI learner tokens: "cart", "ert", "gradtree:0.5", ..."""
    token = token.strip()
    name, sep, lam = token.partition(":")
    if name not in (GRADIENT_LEARNER,) + BASELINE_LEARNERS:
        raise ValueError(f"unknown learner {name!r}")
    if not sep:
        return LearnerSpec(name=name, lambda_=None)
    if name != GRADIENT_LEARNER:
        raise ValueError(f"only {GRADIENT_LEARNER} takes a lambda suffix, got {token!r}")
    try:
        value = float(lam)
    except ValueError:
        raise ValueError(f"bad lambda in learner token {token!r}") from None
    if value < 0:
        raise ValueError("lambda must be >= 0")
    return LearnerSpec(name=name, lambda_=value)


def train_tree(
    dataset: Dataset,
    learner: str = GRADIENT_LEARNER,
    *,
    tree_config: Optional[builder.TreeConfig] = None,
    baseline_config: Optional[baselines.BaselineConfig] = None,
    init: str = "zeros",
    prior_eps: float = 1e-6,
) -> Tree:
    """Fit one tree of the requested kind on the whole dataset."""
    task = dataset.task
    if learner == GRADIENT_LEARNER:
        if tree_config is None:
            raise ValueError("gradtree learner requires a tree_config")
        if task == "regression":
            tree = builder.fit(dataset.X, dataset.y, SquaredErrorLoss(), tree_config)
            tree.task = "regression"
            tree.meta["value_kind"] = "values"
        elif task == "classification":
            loss = CrossEntropyLoss(dataset.n_classes)
            tree = builder.fit(dataset.X, dataset.y, loss, tree_config)
            tree.task = "classification"
            tree.meta["value_kind"] = "logits"
            tree.meta["class_values"] = _class_values(dataset)
        else:
            tree = survival.fit_survival_tree(
                dataset.X,
                dataset.time,
                dataset.event,
                tree_config,
                init=init,
                prior_eps=prior_eps,
            )
        return tree

    if baseline_config is None:
        raise ValueError(f"{learner} learner requires a baseline_config")
    if learner in ("cart", "ert"):
        if task == "survival":
            raise ValueError(f"{learner} does not handle survival data; use surv_tree")
        algorithm = f"{learner}_{task}"
        config = replace(baseline_config, algorithm=algorithm)
        tree = baselines.fit_cart(dataset.X, dataset.y, config)
        if task == "classification":
            tree.meta["class_values"] = _class_values(dataset)
        return tree
    if learner == "surv_tree":
        if task != "survival":
            raise ValueError("surv_tree only handles survival data")
        config = replace(baseline_config, algorithm="surv_tree")
        return baselines.fit_surv_tree(dataset.X, dataset.time, dataset.event, config)
    raise ValueError(f"unknown learner {learner!r}")


def _class_values(dataset: Dataset) -> list:
    if dataset.class_values is not None:
        return list(dataset.class_values)
    return list(range(dataset.n_classes))


def class_scores(tree: Tree, X) -> np.ndarray:
    """Per-class score matrix: softmax of logits, or stored frequencies."""
    values = tree.predict(X)
    if tree.meta.get("value_kind") == "logits":
        return softmax(values)
    return values


def score_tree(tree: Tree, dataset: Dataset) -> float:
    """Task metric of the tree on a held-out dataset."""
    if dataset.task == "regression":
        return metrics.r2(dataset.y, tree.predict(dataset.X).ravel())
    if dataset.task == "classification":
        return metrics.roc_auc(dataset.y, class_scores(tree, dataset.X))
    return metrics.c_index(
        dataset.time, dataset.event, survival.predict_risk(tree, dataset.X)
    )


def _worker_count() -> int:
    raw = os.environ.get("GRADTREE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, n)


@dataclass(frozen=True)
class SweepOptions:
    min_samples_split: int = 6
    min_samples_leaf: int = 3
    learning_rate: float = 1.0
    threshold_mode: str = "exhaustive"
    n_guess: int = 32
    init: str = "zeros"
    leaf_mode: str = "adjusted_value"
    prior_eps: float = 1e-6
    ert_candidates: int = 1


def _cell_seed(base_seed: int, learner_idx: int, depth: int, fold: int) -> int:
    # stable mixing; values only need to be distinct and reproducible
    return (base_seed * 1000003 + learner_idx * 8191 + depth * 131 + fold) % (2**31)


def _run_cell(dataset, folds, spec, learner_idx, depth, fold, base_seed, opts):
    train_idx, test_idx = folds[fold]
    dtrain = dataset.subset(train_idx)
    dtest = dataset.subset(test_idx)
    seed = _cell_seed(base_seed, learner_idx, depth, fold)
    if spec.name == GRADIENT_LEARNER:
        config = builder.TreeConfig(
            max_depth=depth,
            min_samples_split=opts.min_samples_split,
            min_samples_leaf=opts.min_samples_leaf,
            lambda_=spec.lambda_ if spec.lambda_ is not None else 0.0,
            learning_rate=opts.learning_rate,
            threshold_mode=opts.threshold_mode,
            n_guess=opts.n_guess,
            leaf_mode=opts.leaf_mode,
            rng_seed=seed,
        )
        tree = train_tree(
            dtrain,
            GRADIENT_LEARNER,
            tree_config=config,
            init=opts.init,
            prior_eps=opts.prior_eps,
        )
    else:
        config = baselines.BaselineConfig(
            algorithm="surv_tree" if spec.name == "surv_tree" else f"{spec.name}_{dataset.task}",
            max_depth=depth,
            min_samples_split=opts.min_samples_split,
            min_samples_leaf=opts.min_samples_leaf,
            ert_candidates=opts.ert_candidates,
            rng_seed=seed,
        )
        tree = train_tree(dtrain, spec.name, baseline_config=config)
    return score_tree(tree, dtest)


def run_sweep(
    dataset: Dataset,
    learners,
    depths,
    n_folds: int = 5,
    seed: int = 0,
    opts: SweepOptions = SweepOptions(),
):
    """CV scores for every (learner, depth, fold) cell.

    Returns rows (learner, lambda, depth, fold, metric, value) sorted by
    (learner, lambda, depth, fold), with lambda None for baselines.
    """
    specs = [parse_learner_token(t) if isinstance(t, str) else t for t in learners]
    folds = kfold_split(dataset.n_samples, n_folds, seed)
    metric = METRIC_BY_TASK[dataset.task]
    cells = [
        (li, spec, depth, fold)
        for li, spec in enumerate(specs)
        for depth in depths
        for fold in range(n_folds)
    ]

    def work(cell):
        li, spec, depth, fold = cell
        value = _run_cell(dataset, folds, spec, li, depth, fold, seed, opts)
        return (spec.name, spec.lambda_, int(depth), int(fold), metric, float(value))

    workers = _worker_count()
    if workers == 1:
        rows = [work(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(work, cells))
    rows.sort(key=lambda r: (r[0], -1.0 if r[1] is None else r[1], r[2], r[3]))
    return rows


def run_bench(
    dataset: Dataset,
    learners,
    depth: int,
    n_folds: int = 5,
    seed: int = 0,
    opts: SweepOptions = SweepOptions(),
):
    """Single-depth comparison: mean and std of the metric per learner."""
    rows = run_sweep(dataset, learners, [depth], n_folds, seed, opts)
    metric = METRIC_BY_TASK[dataset.task]
    out = []
    seen = []
    for name, lam, _, _, _, _ in rows:
        if (name, lam) not in seen:
            seen.append((name, lam))
    for name, lam in seen:
        vals = np.array([r[5] for r in rows if r[0] == name and r[1] == lam])
        out.append((name, lam, int(depth), metric, float(vals.mean()), float(vals.std()), int(vals.size)))
    return out
