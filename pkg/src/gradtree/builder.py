"""Grows trees by one Newton step per node on an arbitrary loss.

The key departure from classical gradient-boosting tree induction: the
per-sample gradient g and diagonal Hessian h are re-evaluated at every
node, at that node's own current prediction vector c_n, instead of once
per tree at the ensemble's previous prediction. Splitting a node with M
samples produces children whose values move from the parent's by one
damped Newton step

    u = -G_U / (M * lam + H_U)        (componentwise, left child)
    child.value = parent.value + learning_rate * u

where G_U, H_U sum g and h over the samples routed left, and M * lam is
the L2 penalty on the adjustment, scaled by the parent count for both
children. The split chosen is the one minimising the second-order
expansion of the loss,

    sum_j [ u_j G_Uj + 1/2 u_j^2 (H_Uj + M lam) ]  + (same for the right),

scanned in O(m) per feature with running prefix sums over the samples
sorted by that feature. Ties break toward the lowest loss, then the
lowest feature index, then the lowest threshold, which together with a
fixed summation order makes growth bit-reproducible for a given config
and seed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import NumericalError
from .tree import Node, Tree

THRESHOLD_MODES = ("exhaustive", "random")
INIT_MODES = ("zeros", "provided")
LEAF_MODES = ("adjusted_value", "kaplan_meier")


@dataclass(frozen=True, eq=False)
class TreeConfig:
    """Growth controls for the gradient tree builder.

    lambda_ is the L2 damping on per-node adjustments; learning_rate in
    (0, 1] shrinks every adjustment. Setting both to no damping
    (lambda_=0, learning_rate=1) is allowed but emits a warning since
    nothing then tempers a bad Newton step.
    """

    max_depth: int
    min_samples_split: int = 6
    min_samples_leaf: int = 3
    lambda_: float = 0.0
    learning_rate: float = 1.0
    threshold_mode: str = "exhaustive"
    n_guess: int = 32
    init_mode: str = "zeros"
    init_value: Optional[np.ndarray] = None
    leaf_mode: str = "adjusted_value"
    rng_seed: int = 0

    def validate(self) -> None:
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.lambda_ < 0:
            raise ValueError("lambda_ must be >= 0")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if self.threshold_mode not in THRESHOLD_MODES:
            raise ValueError(f"threshold_mode must be one of {THRESHOLD_MODES}")
        if self.n_guess < 1:
            raise ValueError("n_guess must be >= 1")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"init_mode must be one of {INIT_MODES}")
        if self.init_mode == "provided" and self.init_value is None:
            raise ValueError("init_mode 'provided' requires init_value")
        if self.leaf_mode not in LEAF_MODES:
            raise ValueError(f"leaf_mode must be one of {LEAF_MODES}")
        if self.lambda_ == 0.0 and self.learning_rate == 1.0:
            warnings.warn(
                "lambda_=0 with learning_rate=1 leaves Newton steps undamped",
                RuntimeWarning,
                stacklevel=2,
            )

    def to_dict(self) -> dict:
        d = {
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "min_samples_leaf": self.min_samples_leaf,
            "lambda": self.lambda_,
            "learning_rate": self.learning_rate,
            "threshold_mode": self.threshold_mode,
            "n_guess": self.n_guess,
            "init_mode": self.init_mode,
            "leaf_mode": self.leaf_mode,
            "rng_seed": self.rng_seed,
        }
        if self.init_value is not None:
            d["init_value"] = [float(v) for v in np.asarray(self.init_value).ravel()]
        return d


@dataclass
class NodeStats:
    """Summed gradient / Hessian over a node's samples, plus the count."""

    G: np.ndarray
    H: np.ndarray
    M: int


@dataclass
class SplitResult:
    feature_index: int
    threshold: float
    u: np.ndarray
    v: np.ndarray
    approx_loss: float
    left_count: int
    right_count: int


def accumulate_node_stats(g: np.ndarray, h: np.ndarray, sample_ids: np.ndarray) -> NodeStats:
    """Sum g and h over the given rows in ascending sample-index order.

    Uses cumsum rather than sum: cumsum's sequential accumulation is
    bit-identical to a naive left-to-right loop, whereas numpy's sum may
    reorder additions (pairwise blocks) on contiguous axes.
    """
    ids = np.sort(np.asarray(sample_ids))
    if ids.size == 0:
        return NodeStats(G=np.zeros(g.shape[1]), H=np.zeros(h.shape[1]), M=0)
    return NodeStats(
        G=np.cumsum(g[ids], axis=0)[-1],
        H=np.cumsum(h[ids], axis=0)[-1],
        M=int(ids.size),
    )


def leaf_adjustment(G: np.ndarray, H: np.ndarray, M: int, lambda_: float) -> np.ndarray:
    """Damped Newton step -G / (M*lambda + H), componentwise.

    A zero denominator with a zero numerator (every sample in the node
    dropped by the loss, no damping) yields a zero adjustment; a zero
    denominator with signal in G means Hessian flooring was bypassed and
    is reported as an internal error.
    """
    den = M * lambda_ + H
    bad = den <= 0.0
    if np.any(bad):
        if np.any(bad & (G != 0.0)):
            raise NumericalError("zero denominator in leaf adjustment with nonzero gradient")
        adj = np.zeros_like(G)
        ok = ~bad
        adj[ok] = -G[ok] / den[ok]
        return adj
    return -G / den


def _candidate_losses(GU, HU, stats: NodeStats, lambda_: float):
    """Second-order loss of candidates given left prefix sums (k, q)."""
    reg = stats.M * lambda_
    GV = stats.G - GU
    HV = stats.H - HU
    dU = HU + reg
    dV = HV + reg
    u = np.zeros_like(GU)
    v = np.zeros_like(GV)
    np.divide(-GU, dU, out=u, where=dU > 0)
    np.divide(-GV, dV, out=v, where=dV > 0)
    loss = (u * GU + 0.5 * u * u * dU + v * GV + 0.5 * v * v * dV).sum(axis=1)
    return loss, u, v


def scan_feature(
    values: np.ndarray,
    g_rows: np.ndarray,
    h_rows: np.ndarray,
    stats: NodeStats,
    config: TreeConfig,
    rng: Optional[np.random.Generator] = None,
    feature_index: int = 0,
) -> Optional[SplitResult]:
    """Best admissible threshold on one feature, or None.

    ``values`` must be sorted ascending with ``g_rows`` / ``h_rows``
    aligned to the same order. Exhaustive mode scans the midpoints
    between consecutive distinct values; random mode draws
    ``config.n_guess`` thresholds uniformly between the node's min and
    max for this feature (requires ``rng``). Candidates leaving either
    side below min_samples_leaf are skipped. Within the feature, ties in
    the approximated loss resolve to the lowest threshold.
    """
    m = int(values.shape[0])
    msl = config.min_samples_leaf
    if m < 2 * msl or values[0] == values[-1]:
        return None

    if config.threshold_mode == "random":
        if rng is None:
            raise ValueError("random threshold mode requires an rng")
        thr = np.sort(rng.uniform(values[0], values[-1], size=config.n_guess))
        left_counts = np.searchsorted(values, thr, side="right")
        valid = (left_counts >= msl) & (m - left_counts >= msl)
        if not np.any(valid):
            return None
        thr = thr[valid]
        left_counts = left_counts[valid]
        cg = np.cumsum(g_rows, axis=0)
        ch = np.cumsum(h_rows, axis=0)
        GU = cg[left_counts - 1]
        HU = ch[left_counts - 1]
        loss, u, v = _candidate_losses(GU, HU, stats, config.lambda_)
        j = int(np.argmin(loss))
        if not np.isfinite(loss[j]):
            return None
        lc = int(left_counts[j])
        return SplitResult(
            feature_index=feature_index,
            threshold=float(thr[j]),
            u=u[j].copy(),
            v=v[j].copy(),
            approx_loss=float(loss[j]),
            left_count=lc,
            right_count=m - lc,
        )

    # exhaustive: candidate i puts rows 0..i on the left
    i_lo = msl - 1
    i_hi = m - msl - 1
    idx = np.arange(i_lo, i_hi + 1)
    distinct = values[idx] != values[idx + 1]
    if not np.any(distinct):
        return None
    idx = idx[distinct]
    cg = np.cumsum(g_rows, axis=0)
    ch = np.cumsum(h_rows, axis=0)
    loss, u, v = _candidate_losses(cg[idx], ch[idx], stats, config.lambda_)
    j = int(np.argmin(loss))
    if not np.isfinite(loss[j]):
        return None
    i = int(idx[j])
    thr = (values[i] + values[i + 1]) / 2.0
    if thr == values[i + 1]:
        # adjacent representable floats: keep routing consistent with the
        # scan's left set (x <= thr)
        thr = values[i]
    return SplitResult(
        feature_index=feature_index,
        threshold=float(thr),
        u=u[j].copy(),
        v=v[j].copy(),
        approx_loss=float(loss[j]),
        left_count=i + 1,
        right_count=m - i - 1,
    )


def find_best_split(
    X: np.ndarray,
    sample_ids: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    stats: NodeStats,
    config: TreeConfig,
    rng: Optional[np.random.Generator] = None,
) -> Optional[SplitResult]:
    """Scan every feature; global ties resolve to the lowest feature index."""
    g_node = g[sample_ids]
    h_node = h[sample_ids]
    best: Optional[SplitResult] = None
    for k in range(X.shape[1]):
        col = X[sample_ids, k]
        order = np.argsort(col, kind="stable")
        res = scan_feature(
            col[order], g_node[order], h_node[order], stats, config, rng, feature_index=k
        )
        if res is not None and (best is None or res.approx_loss < best.approx_loss):
            best = res
    return best


def fit(X, labels, loss, config: TreeConfig) -> Tree:
    """Grow one tree on (X, labels) under the given loss.

    The root value is the initial vector (zeros, or config.init_value)
    plus one damped Newton step computed from derivatives at that
    initial vector over all samples. Growth is depth-first; each node
    re-evaluates derivatives at its own value before scanning for a
    split. Stopping: depth limit, node smaller than min_samples_split,
    or no admissible candidate. There is no minimum-gain rule, matching
    the baselines, so CART-style comparisons see identical stopping.
    """
    config.validate()
    X = np.ascontiguousarray(np.asarray(X, dtype=float))
    if X.ndim != 2:
        raise ValueError("X must be a 2-d array")
    n, d = X.shape
    if n == 0:
        raise ValueError("cannot fit a tree on an empty dataset")
    if not np.all(np.isfinite(X)):
        raise ValueError("X must be finite")
    labels = loss.validate_labels(labels, n)
    q = loss.output_dim(labels)

    if config.init_mode == "provided":
        init = np.asarray(config.init_value, dtype=float).ravel()
        if init.shape[0] != q:
            raise ValueError(f"init_value has length {init.shape[0]}, loss expects {q}")
    else:
        init = np.zeros(q)

    g = np.zeros((n, q))
    h = np.zeros((n, q))
    all_ids = np.arange(n)
    rng = np.random.default_rng(config.rng_seed)

    loss.batch_grad_hess(labels, all_ids, init, g, h)
    stats = accumulate_node_stats(g, h, all_ids)
    root_value = init + config.learning_rate * leaf_adjustment(
        stats.G, stats.H, stats.M, config.lambda_
    )
    root = Node(value=root_value, depth=0, n_samples=n)

    def grow(node: Node, ids: np.ndarray) -> None:
        if node.depth >= config.max_depth or ids.size < config.min_samples_split:
            return
        loss.batch_grad_hess(labels, ids, node.value, g, h)
        node_stats = accumulate_node_stats(g, h, ids)
        best = find_best_split(X, ids, g, h, node_stats, config, rng)
        if best is None:
            return
        mask = X[ids, best.feature_index] <= best.threshold
        left_ids = ids[mask]
        right_ids = ids[~mask]
        # recompute the winning adjustments from child sums taken in
        # ascending sample order, so child values do not depend on the
        # scan's prefix-sum rounding
        ls = accumulate_node_stats(g, h, left_ids)
        rs = accumulate_node_stats(g, h, right_ids)
        lam = config.lambda_
        u = leaf_adjustment(ls.G, ls.H, node_stats.M, lam)
        v = leaf_adjustment(rs.G, rs.H, node_stats.M, lam)
        node.feature = best.feature_index
        node.threshold = best.threshold
        node.left = Node(
            value=node.value + config.learning_rate * u,
            depth=node.depth + 1,
            n_samples=int(left_ids.size),
        )
        node.right = Node(
            value=node.value + config.learning_rate * v,
            depth=node.depth + 1,
            n_samples=int(right_ids.size),
        )
        grow(node.left, left_ids)
        grow(node.right, right_ids)

    grow(root, all_ids)
    return Tree(
        root=root,
        n_features=d,
        output_dim=q,
        learner="gradtree",
        task="",
        config=config.to_dict(),
        meta={"loss": loss.name},
    )


def clone_config(config: TreeConfig, **changes) -> TreeConfig:
    """dataclasses.replace wrapper kept next to TreeConfig for callers."""
    return replace(config, **changes)
