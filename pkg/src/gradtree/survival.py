"""Right-censored survival support: interval encoding, Kaplan-Meier
estimates, prior logits, and the glue that grows a gradient tree on a
set-valued cross-entropy over time intervals.

The time axis is cut at the sorted distinct observed event times
tau_0 < ... < tau_{C-1} into C intervals [tau_j, tau_{j+1}) with the
last interval open-ended. A sample observed at time t gets a one-hot
label at the interval containing t; a sample censored at time t gets a
0/1 label marking every interval that starts after t (the set of
intervals the true event time could still fall in). Censored samples at
or beyond the last boundary select no interval and are dropped from
gradient computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import builder
from .losses import GeneralizedCrossEntropyLoss, softmax
from .tree import Tree


@dataclass(frozen=True)
class TimeGrid:
    """Sorted distinct observed event times defining the intervals."""

    boundaries: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        if b.ndim != 1 or b.size == 0:
            raise ValueError("time grid needs at least one boundary")
        if not np.all(np.isfinite(b)):
            raise ValueError("time grid boundaries must be finite")
        if np.any(np.diff(b) <= 0):
            raise ValueError("time grid boundaries must be strictly increasing")
        object.__setattr__(self, "boundaries", b)

    @property
    def n_intervals(self) -> int:
        return int(self.boundaries.size)

    def interval_index(self, t: float) -> int:
        """Index of the interval containing t, clamped to [0, C-1]."""
        i = int(np.searchsorted(self.boundaries, t, side="right")) - 1
        return min(max(i, 0), self.n_intervals - 1)

    def representative_points(self) -> np.ndarray:
        """Interval midpoints; the open last interval is represented by
        its left boundary."""
        b = self.boundaries
        if b.size == 1:
            return b.copy()
        mids = (b[:-1] + b[1:]) / 2.0
        return np.append(mids, b[-1])


def build_time_grid(times, events) -> TimeGrid:
    times = np.asarray(times, dtype=float)
    events = np.asarray(events)
    observed = np.unique(times[events == 1])
    if observed.size == 0:
        raise ValueError("cannot build a time grid with no observed events")
    return TimeGrid(observed)


def encode_survival_label(t: float, event: int, grid: TimeGrid) -> np.ndarray:
    """Single-sample 0/1 interval label (see module docstring)."""
    C = grid.n_intervals
    y = np.zeros(C)
    if event == 1:
        y[grid.interval_index(t)] = 1.0
    else:
        y[grid.boundaries > t] = 1.0
    return y


def encode_survival_labels(times, events, grid: TimeGrid):
    """Batch encoding. Returns (labels, n_dropped) where dropped rows are
    censored at or beyond the last boundary (all-zero labels)."""
    times = np.asarray(times, dtype=float)
    events = np.asarray(events)
    n = times.size
    labels = np.zeros((n, grid.n_intervals))
    obs = events == 1
    if np.any(obs):
        idx = np.clip(
            np.searchsorted(grid.boundaries, times[obs], side="right") - 1,
            0,
            grid.n_intervals - 1,
        )
        labels[np.flatnonzero(obs), idx] = 1.0
    cen = np.flatnonzero(~obs)
    if cen.size:
        labels[cen] = grid.boundaries[None, :] > times[cen, None]
    n_dropped = int(np.sum(labels.sum(axis=1) == 0))
    return labels, n_dropped


@dataclass(frozen=True)
class KMCurve:
    """Product-limit estimate evaluated on a grid.

    survival[j] is P(T > tau_j) (the value the right-continuous curve
    takes on [tau_j, tau_{j+1})); at_risk[j] is P(T >= tau_j) (the value
    just before tau_j). Interval probabilities difference the at_risk
    vector; plotting and empirical-survival comparisons use survival.
    """

    grid: TimeGrid
    survival: np.ndarray
    at_risk: np.ndarray


def km_estimate(times, events, grid: TimeGrid) -> KMCurve:
    """Kaplan-Meier product-limit estimate of the sample, on the grid.

    The running product is kept as an exact rational (counts are small
    integers) and converted to float once per grid point, so every
    returned value is the correctly rounded estimate. In particular,
    with no censoring the product telescopes and the curve matches the
    empirical survival fraction bit for bit.
    """
    times = np.asarray(times, dtype=float)
    events = np.asarray(events)
    if times.size == 0:
        raise ValueError("cannot estimate a survival curve from no samples")
    ev_times = np.unique(times[events == 1])
    if ev_times.size == 0:
        ones = np.ones(grid.n_intervals)
        return KMCurve(grid=grid, survival=ones, at_risk=ones.copy())
    running = Fraction(1)
    cum = [1.0]
    for e in ev_times:
        deaths = int(np.sum((times == e) & (events == 1)))
        at_risk = int(np.sum(times >= e))
        running *= Fraction(at_risk - deaths, at_risk)
        cum.append(float(running))
    padded = np.array(cum)
    # survival after tau (events at times <= tau applied)
    k_incl = np.searchsorted(ev_times, grid.boundaries, side="right")
    # survival just before tau (events strictly before tau applied)
    k_excl = np.searchsorted(ev_times, grid.boundaries, side="left")
    return KMCurve(grid=grid, survival=padded[k_incl], at_risk=padded[k_excl])


def interval_probabilities(curve: KMCurve) -> np.ndarray:
    """Probability mass per interval from the at-risk curve.

    p_0 = 1 - S(tau_1^-), p_k = S(tau_k^-) - S(tau_{k+1}^-) and the last
    interval absorbs the tail, so the masses always sum to one.
    """
    S = curve.at_risk
    C = S.size
    if C == 1:
        return np.ones(1)
    p = np.empty(C)
    p[0] = 1.0 - S[1]
    p[1:-1] = S[1:-1] - S[2:]
    p[-1] = S[-1]
    return p


def prior_logits(p: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Logits whose softmax reproduces p after flooring at eps.

    Inverse of the softmax up to an additive constant (taken as zero):
    log(max(p_k, eps)). eps must be positive and should stay below 1/C
    so the flooring cannot invert the ordering of the masses.
    """
    p = np.asarray(p, dtype=float)
    if eps <= 0:
        raise ValueError("eps must be positive")
    return np.log(np.maximum(p, eps))


def survival_curve_from_logits(z: np.ndarray, grid: TimeGrid) -> KMCurve:
    """Step survival function implied by interval logits."""
    z = np.asarray(z, dtype=float)
    if z.shape != (grid.n_intervals,):
        raise ValueError(
            f"expected {grid.n_intervals} logits for this grid, got {z.shape}"
        )
    s = softmax(z)
    csum = np.cumsum(s)
    at_risk = np.concatenate(([1.0], 1.0 - csum[:-1]))
    survival = np.maximum(1.0 - csum, 0.0)
    return KMCurve(grid=grid, survival=survival, at_risk=at_risk)


def expected_event_time(p: np.ndarray, grid: TimeGrid) -> float:
    """Mean event time under per-interval masses, intervals represented
    by their midpoints (left boundary for the open last interval)."""
    return float(np.dot(p, grid.representative_points()))


def risk_score(z: np.ndarray, grid: TimeGrid) -> float:
    """Negative expected event time: higher risk means earlier events."""
    return -expected_event_time(softmax(np.asarray(z, dtype=float)), grid)


def fit_survival_tree(
    X,
    times,
    events,
    config: builder.TreeConfig,
    init: str = "zeros",
    prior_eps: float = 1e-6,
) -> Tree:
    """Grow a gradient tree on interval-encoded censored targets.

    init "zeros" starts every logit at 0 (uniform interval masses);
    init "km" starts at the log of the pooled Kaplan-Meier interval
    masses, floored at prior_eps, which is usually a much better
    starting point at high censoring. leaf_mode "kaplan_meier" replaces
    each leaf's predictive distribution by the product-limit estimate of
    its own training samples (the logits that grew the tree are kept).
    """
    times = np.asarray(times, dtype=float)
    events = np.asarray(events)
    if np.any(times < 0):
        raise ValueError("survival times must be nonnegative")
    if not np.all((events == 0) | (events == 1)):
        raise ValueError("event indicators must be 0 or 1")
    grid = build_time_grid(times, events)
    labels, n_dropped = encode_survival_labels(times, events, grid)
    loss = GeneralizedCrossEntropyLoss()

    if init == "km":
        pooled = km_estimate(times, events, grid)
        z0 = prior_logits(interval_probabilities(pooled), prior_eps)
        config = builder.clone_config(config, init_mode="provided", init_value=z0)
    elif init != "zeros":
        raise ValueError("init must be 'zeros' or 'km'")

    tree = builder.fit(X, labels, loss, config)
    tree.task = "survival"
    tree.meta.update(
        {
            "time_grid": [float(b) for b in grid.boundaries],
            "value_kind": "logits",
            "dropped_rows": n_dropped,
            "init": init,
        }
    )
    if config.leaf_mode == "kaplan_meier":
        X_arr = np.asarray(X, dtype=float)
        leaf_of = tree.apply(X_arr)
        nodes = list(tree.iter_nodes())
        for leaf_idx in np.unique(leaf_of):
            members = np.flatnonzero(leaf_of == leaf_idx)
            curve = km_estimate(times[members], events[members], grid)
            nodes[leaf_idx].distribution = interval_probabilities(curve)
    return tree


def tree_grid(tree: Tree) -> TimeGrid:
    return TimeGrid(np.asarray(tree.meta["time_grid"], dtype=float))


def predict_risk(tree: Tree, X) -> np.ndarray:
    """Per-sample risk score (negative expected event time)."""
    grid = tree_grid(tree)
    rep = grid.representative_points()
    X = np.asarray(X, dtype=float)
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        leaf = tree.leaf_for(X[i])
        if leaf.distribution is not None:
            p = leaf.distribution
        elif tree.meta.get("value_kind") == "probabilities":
            p = leaf.value
        else:
            p = softmax(leaf.value)
        out[i] = -float(np.dot(p, rep))
    return out


def predict_survival_curves(tree: Tree, X) -> list:
    """KMCurve per sample, from leaf distributions or logits."""
    grid = tree_grid(tree)
    X = np.asarray(X, dtype=float)
    curves = []
    for i in range(X.shape[0]):
        leaf = tree.leaf_for(X[i])
        if leaf.distribution is not None:
            p = np.asarray(leaf.distribution, dtype=float)
        elif tree.meta.get("value_kind") == "probabilities":
            p = np.asarray(leaf.value, dtype=float)
        else:
            curves.append(survival_curve_from_logits(leaf.value, grid))
            continue
        csum = np.cumsum(p)
        at_risk = np.concatenate(([1.0], 1.0 - csum[:-1]))
        survival = np.maximum(1.0 - csum, 0.0)
        curves.append(KMCurve(grid=grid, survival=survival, at_risk=at_risk))
    return curves
