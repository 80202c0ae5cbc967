"""Reference tree learners the gradient method is compared against.

All three share the gradient builder's mechanics exactly where it
matters for fair comparison: the same candidate thresholds (midpoints
between consecutive distinct values, or uniform random draws), the same
admissibility rule (min_samples_leaf on both sides), the same stopping
rules (max_depth, min_samples_split, no admissible candidate; no
minimum-gain rule), the same routing (x <= threshold goes left), and
the same tie-breaking (best score, then lowest feature index, then
lowest threshold).

cart:      impurity reduction, SSE for regression / Gini for class
           frequencies; leaves store means or class-frequency vectors.
ert:       like cart but each feature is scored only at a few uniform
           random thresholds between the node's min and max.
surv_tree: maximises the two-sample log-rank statistic between the
           children; every node stores the Kaplan-Meier interval masses
           of its own samples on the global time grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .survival import TimeGrid, build_time_grid, interval_probabilities, km_estimate
from .tree import Node, Tree

CART_ALGORITHMS = ("cart_regression", "cart_classification")
ERT_ALGORITHMS = ("ert_regression", "ert_classification")


@dataclass(frozen=True)
class BaselineConfig:
    algorithm: str
    max_depth: int
    min_samples_split: int = 6
    min_samples_leaf: int = 3
    ert_candidates: int = 1
    rng_seed: int = 0

    def validate(self) -> None:
        known = CART_ALGORITHMS + ERT_ALGORITHMS + ("surv_tree",)
        if self.algorithm not in known:
            raise ValueError(f"algorithm must be one of {known}")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.ert_candidates < 1:
            raise ValueError("ert_candidates must be >= 1")

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "min_samples_leaf": self.min_samples_leaf,
            "ert_candidates": self.ert_candidates,
            "rng_seed": self.rng_seed,
        }


def _check_X(X) -> np.ndarray:
    X = np.ascontiguousarray(np.asarray(X, dtype=float))
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a non-empty 2-d array")
    if not np.all(np.isfinite(X)):
        raise ValueError("X must be finite")
    return X


def _exhaustive_positions(vals: np.ndarray, msl: int) -> Optional[np.ndarray]:
    """Admissible cut positions: left side is rows 0..i of the sorted node."""
    m = vals.shape[0]
    if m < 2 * msl:
        return None
    idx = np.arange(msl - 1, m - msl)
    idx = idx[vals[idx] != vals[idx + 1]]
    return idx if idx.size else None


def _midpoint_thresholds(vals: np.ndarray, idx: np.ndarray) -> np.ndarray:
    thr = (vals[idx] + vals[idx + 1]) / 2.0
    # guard against midpoints rounding up onto the next value
    return np.where(thr == vals[idx + 1], vals[idx], thr)


def _random_cuts(vals, rng, n_cand, msl):
    """Random thresholds and the cut positions they induce, or None."""
    m = vals.shape[0]
    if m < 2 * msl or vals[0] == vals[-1]:
        return None
    thr = np.sort(rng.uniform(vals[0], vals[-1], size=n_cand))
    left = np.searchsorted(vals, thr, side="right")
    ok = (left >= msl) & (m - left >= msl)
    if not np.any(ok):
        return None
    return thr[ok], left[ok] - 1


def _sse_prefix_score(ys: np.ndarray, idx: np.ndarray) -> np.ndarray:
    m = ys.shape[0]
    c1 = np.cumsum(ys)
    c2 = np.cumsum(ys * ys)
    nl = (idx + 1).astype(float)
    nr = m - nl
    sl = c1[idx]
    s2 = c2[idx]
    sse_l = s2 - sl * sl / nl
    sse_r = (c2[-1] - s2) - (c1[-1] - sl) ** 2 / nr
    return sse_l + sse_r


def _gini_prefix_score(Y: np.ndarray, idx: np.ndarray) -> np.ndarray:
    m = Y.shape[0]
    cc = np.cumsum(Y, axis=0)
    nl = (idx + 1).astype(float)
    nr = m - nl
    cl = cc[idx]
    cr = cc[-1] - cl
    gini_l = nl - (cl * cl).sum(axis=1) / nl
    gini_r = nr - (cr * cr).sum(axis=1) / nr
    return gini_l + gini_r


def _grow_impurity_tree(X, config, value_of, score_prefix, sorted_payload, is_pure):
    """Shared grower for cart/ert. score_prefix(payload_sorted, idx) must
    return the impurity of each candidate (lower is better);
    sorted_payload(ids, order) returns whatever score_prefix consumes;
    is_pure(ids) stops growth at zero-impurity nodes, the classic CART
    convention."""
    config.validate()
    n = X.shape[0]
    rng = np.random.default_rng(config.rng_seed)
    random_mode = config.algorithm in ERT_ALGORITHMS
    msl = config.min_samples_leaf

    def best_split(ids):
        best = None
        for k in range(X.shape[1]):
            col = X[ids, k]
            order = np.argsort(col, kind="stable")
            vals = col[order]
            if vals[0] == vals[-1]:
                continue
            if random_mode:
                cuts = _random_cuts(vals, rng, config.ert_candidates, msl)
                if cuts is None:
                    continue
                thr, idx = cuts
            else:
                idx = _exhaustive_positions(vals, msl)
                if idx is None:
                    continue
                thr = _midpoint_thresholds(vals, idx)
            score = score_prefix(sorted_payload(ids, order), idx)
            j = int(np.argmin(score))
            if not np.isfinite(score[j]):
                continue
            if best is None or score[j] < best[0]:
                best = (float(score[j]), k, float(thr[j]))
        return best

    root = Node(value=value_of(np.arange(n)), depth=0, n_samples=n)

    def grow(node, ids):
        if node.depth >= config.max_depth or ids.size < config.min_samples_split:
            return
        if is_pure(ids):
            return
        found = best_split(ids)
        if found is None:
            return
        _, k, thr = found
        mask = X[ids, k] <= thr
        left_ids, right_ids = ids[mask], ids[~mask]
        node.feature = k
        node.threshold = thr
        node.left = Node(value=value_of(left_ids), depth=node.depth + 1, n_samples=int(left_ids.size))
        node.right = Node(value=value_of(right_ids), depth=node.depth + 1, n_samples=int(right_ids.size))
        grow(node.left, left_ids)
        grow(node.right, right_ids)

    grow(root, np.arange(n))
    return root


def fit_cart(X, y, config: BaselineConfig) -> Tree:
    """Classic impurity-reduction tree. algorithm picks the task:
    cart_regression (SSE, mean leaves) or cart_classification (Gini,
    class-frequency leaves). Also serves ert_* via random thresholds."""
    X = _check_X(X)
    if config.algorithm in ("cart_regression", "ert_regression"):
        y = np.asarray(y, dtype=float).ravel()
        if y.shape[0] != X.shape[0]:
            raise ValueError("y length does not match X")

        def value_of(ids):
            return np.array([y[ids].mean()])

        def is_pure(ids):
            yv = y[ids]
            return yv.min() == yv.max()

        root = _grow_impurity_tree(
            X, config, value_of, _sse_prefix_score, lambda ids, order: y[ids][order], is_pure
        )
        task, q, meta = "regression", 1, {"value_kind": "values"}
    elif config.algorithm in ("cart_classification", "ert_classification"):
        y = np.asarray(y)
        if not np.issubdtype(y.dtype, np.integer):
            raise ValueError("classification labels must be integers")
        n_classes = int(y.max()) + 1
        if n_classes < 2:
            raise ValueError("need at least two classes")
        Y = np.zeros((y.shape[0], n_classes))
        Y[np.arange(y.shape[0]), y] = 1.0

        def value_of(ids):
            return Y[ids].mean(axis=0)

        def is_pure(ids):
            yv = y[ids]
            return yv.min() == yv.max()

        root = _grow_impurity_tree(
            X, config, value_of, _gini_prefix_score, lambda ids, order: Y[ids][order], is_pure
        )
        task, q = "classification", n_classes
        meta = {"value_kind": "probabilities", "classes": list(range(n_classes))}
    else:
        raise ValueError(f"fit_cart cannot grow {config.algorithm!r}")
    return Tree(
        root=root,
        n_features=X.shape[1],
        output_dim=q,
        learner=config.algorithm,
        task=task,
        config=config.to_dict(),
        meta=meta,
    )


def fit_ert(X, y, config: BaselineConfig) -> Tree:
    """Extremely randomized variant: same machinery, random thresholds."""
    if config.algorithm not in ERT_ALGORITHMS:
        raise ValueError(f"fit_ert cannot grow {config.algorithm!r}")
    return fit_cart(X, y, config)


def _logrank_statistics(Rn, Dn, idx):
    """Two-sample log-rank statistic for each candidate cut position.

    Rn[i, j] = 1 if sorted sample i is still at risk at pooled event
    time j; Dn[i, j] = 1 if it dies there. The left group of candidate
    idx[c] is rows 0..idx[c]. Candidates where either side has no
    observed events, or where the variance vanishes, score -inf.
    """
    cumR = np.cumsum(Rn, axis=0)
    cumD = np.cumsum(Dn, axis=0)
    nj = cumR[-1]
    dj = cumD[-1]
    n1 = cumR[idx]
    d1 = cumD[idx]
    O = d1.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(nj > 0, n1 / nj, 0.0)
        E = (dj * frac).sum(axis=1)
        vj = np.where(
            nj > 1,
            dj * frac * (1.0 - frac) * (nj - dj) / np.maximum(nj - 1.0, 1.0),
            0.0,
        )
    V = vj.sum(axis=1)
    total_events = dj.sum()
    valid = (O >= 1) & (total_events - O >= 1) & (V > 0)
    stat = np.full(idx.shape[0], -np.inf)
    stat[valid] = (O[valid] - E[valid]) ** 2 / V[valid]
    return stat


def fit_surv_tree(X, times, events, config: BaselineConfig, grid: Optional[TimeGrid] = None) -> Tree:
    """Log-rank survival tree with Kaplan-Meier leaf distributions."""
    if config.algorithm != "surv_tree":
        raise ValueError(f"fit_surv_tree cannot grow {config.algorithm!r}")
    config.validate()
    X = _check_X(X)
    times = np.asarray(times, dtype=float)
    events = np.asarray(events)
    if not np.all((events == 0) | (events == 1)):
        raise ValueError("event indicators must be 0 or 1")
    if grid is None:
        grid = build_time_grid(times, events)
    msl = config.min_samples_leaf

    def value_of(ids):
        curve = km_estimate(times[ids], events[ids], grid)
        return interval_probabilities(curve)

    def best_split(ids):
        t = times[ids]
        e = events[ids]
        ev = np.unique(t[e == 1])
        if ev.size == 0:
            return None
        R = (t[:, None] >= ev[None, :]).astype(float)
        D = ((t[:, None] == ev[None, :]) & (e[:, None] == 1)).astype(float)
        best = None
        for k in range(X.shape[1]):
            col = X[ids, k]
            order = np.argsort(col, kind="stable")
            vals = col[order]
            if vals[0] == vals[-1]:
                continue
            idx = _exhaustive_positions(vals, msl)
            if idx is None:
                continue
            thr = _midpoint_thresholds(vals, idx)
            stat = _logrank_statistics(R[order], D[order], idx)
            j = int(np.argmax(stat))
            if not np.isfinite(stat[j]):
                continue
            if best is None or stat[j] > best[0]:
                best = (float(stat[j]), k, float(thr[j]))
        return best

    n = X.shape[0]
    root = Node(value=value_of(np.arange(n)), depth=0, n_samples=n)

    def grow(node, ids):
        if node.depth >= config.max_depth or ids.size < config.min_samples_split:
            return
        found = best_split(ids)
        if found is None:
            return
        _, k, thr = found
        mask = X[ids, k] <= thr
        left_ids, right_ids = ids[mask], ids[~mask]
        node.feature = k
        node.threshold = thr
        node.left = Node(value=value_of(left_ids), depth=node.depth + 1, n_samples=int(left_ids.size))
        node.right = Node(value=value_of(right_ids), depth=node.depth + 1, n_samples=int(right_ids.size))
        grow(node.left, left_ids)
        grow(node.right, right_ids)

    grow(root, np.arange(n))
    return Tree(
        root=root,
        n_features=X.shape[1],
        output_dim=grid.n_intervals,
        learner="surv_tree",
        task="survival",
        config=config.to_dict(),
        meta={
            "value_kind": "probabilities",
            "time_grid": [float(b) for b in grid.boundaries],
        },
    )
