"""Twice-differentiable losses and their per-sample derivatives.

Every loss exposes the same batch contract consumed by the tree builder:
``batch_grad_hess(labels, sample_ids, cur_value, g_out, h_out)`` fills the
rows ``sample_ids`` of the preallocated ``(N, q)`` buffers with the gradient
and the diagonal of the Hessian of the per-sample loss, evaluated at the
shared prediction vector ``cur_value``. Rows outside ``sample_ids`` are left
untouched. Hessian components are floored at ``HESSIAN_FLOOR`` inside the
loss, except rows that carry no information (all-zero interval labels),
which stay exactly zero so they drop out of every node sum.

Scalar helpers ``loss_value`` and ``grad_hess`` operate on a single sample
and are the reference implementations the batch paths are tested against.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

HESSIAN_FLOOR = 1e-6

LOSS_KINDS = ("se", "ce", "gce")


def softmax(z: np.ndarray) -> np.ndarray:
    """Numerically stable softmax along the last axis.

    Raises ValueError on non-finite input. Shift-invariant: adding a
    constant to every component leaves the result unchanged.
    """
    z = np.asarray(z, dtype=float)
    if z.size == 0:
        raise ValueError("softmax of an empty vector is undefined")
    if not np.all(np.isfinite(z)):
        raise ValueError("softmax input must be finite")
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def _check_gce_label(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError("interval label must be a 1-d 0/1 vector")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("interval label entries must be 0 or 1")
    return y


def loss_value(kind: str, y, yhat) -> float:
    """Per-sample loss for a single (label, prediction) pair.

    kind "se": squared error, y and yhat are q-vectors (or scalars).
    kind "ce": cross-entropy over softmax logits, y is a class index.
    kind "gce": -log of the softmax mass on the index set marked by the
    0/1 vector y; computed via logsumexp so large logits do not overflow.
    """
    yhat = np.asarray(yhat, dtype=float)
    if kind == "se":
        y = np.asarray(y, dtype=float)
        return float(np.sum((yhat - y) ** 2))
    if kind == "ce":
        c = int(y)
        if not 0 <= c < yhat.shape[-1]:
            raise ValueError(f"class index {c} out of range for {yhat.shape[-1]} outputs")
        return float(logsumexp(yhat) - yhat[c])
    if kind == "gce":
        y = _check_gce_label(y)
        if y.shape != yhat.shape:
            raise ValueError("interval label and prediction lengths differ")
        if not np.any(y == 1.0):
            raise ValueError("interval label selects no component")
        return float(logsumexp(yhat) - logsumexp(yhat[y == 1.0]))
    raise ValueError(f"unknown loss kind {kind!r}")


def grad_hess(kind: str, y, yhat, floor: bool = True):
    """Gradient and diagonal Hessian of the per-sample loss at yhat.

    With floor=True (the default used during tree growth) Hessian
    components are raised to HESSIAN_FLOOR; floor=False returns the raw
    analytic values, which is what finite-difference checks compare
    against. Returns a pair of arrays shaped like yhat.
    """
    yhat = np.asarray(yhat, dtype=float)
    if kind == "se":
        y = np.asarray(y, dtype=float)
        g = 2.0 * (yhat - y)
        h = np.full_like(g, 2.0)
    elif kind == "ce":
        c = int(y)
        if not 0 <= c < yhat.shape[-1]:
            raise ValueError(f"class index {c} out of range for {yhat.shape[-1]} outputs")
        s = softmax(yhat)
        g = s.copy()
        g[c] -= 1.0
        h = s * (1.0 - s)
    elif kind == "gce":
        y = _check_gce_label(y)
        if y.shape != yhat.shape:
            raise ValueError("interval label and prediction lengths differ")
        if not np.any(y == 1.0):
            raise ValueError("interval label selects no component")
        s = softmax(yhat)
        r = float(np.dot(y, s))
        g = s * (1.0 - y / r)
        h = s * (1.0 - s - y * (r - s) / (r * r))
    else:
        raise ValueError(f"unknown loss kind {kind!r}")
    if floor:
        h = np.maximum(h, HESSIAN_FLOOR)
    return g, h


class SquaredErrorLoss:
    """Sum of squared errors against a q-dimensional target."""

    name = "se"

    def output_dim(self, labels: np.ndarray) -> int:
        return labels.shape[1]

    def validate_labels(self, labels, n_samples: int) -> np.ndarray:
        labels = np.asarray(labels, dtype=float)
        if labels.ndim == 1:
            labels = labels[:, None]
        if labels.ndim != 2 or labels.shape[0] != n_samples:
            raise ValueError("targets must be an (n_samples, q) array")
        if not np.all(np.isfinite(labels)):
            raise ValueError("targets must be finite")
        return labels

    def batch_grad_hess(self, labels, sample_ids, cur_value, g_out, h_out):
        g_out[sample_ids] = 2.0 * (cur_value - labels[sample_ids])
        h_out[sample_ids] = 2.0


class CrossEntropyLoss:
    """Multinomial cross-entropy over softmax logits; labels are class ids."""

    name = "ce"

    def __init__(self, n_classes: int):
        if n_classes < 2:
            raise ValueError("cross-entropy needs at least two classes")
        self.n_classes = int(n_classes)

    def output_dim(self, labels: np.ndarray) -> int:
        return self.n_classes

    def validate_labels(self, labels, n_samples: int) -> np.ndarray:
        labels = np.asarray(labels)
        if labels.ndim != 1 or labels.shape[0] != n_samples:
            raise ValueError("class labels must be a 1-d array of length n_samples")
        if not np.issubdtype(labels.dtype, np.integer):
            as_int = labels.astype(int)
            if not np.all(as_int == labels):
                raise ValueError("class labels must be integers")
            labels = as_int
        if labels.min(initial=0) < 0 or labels.max(initial=0) >= self.n_classes:
            raise ValueError(f"class labels must lie in [0, {self.n_classes})")
        return labels

    def batch_grad_hess(self, labels, sample_ids, cur_value, g_out, h_out):
        s = softmax(cur_value)
        g_out[sample_ids] = s
        g_out[sample_ids, labels[sample_ids]] -= 1.0
        h_out[sample_ids] = np.maximum(s * (1.0 - s), HESSIAN_FLOOR)


class GeneralizedCrossEntropyLoss:
    """Cross-entropy against an index set: -log of softmax mass on the set.

    Labels are (N, q) 0/1 matrices. Rows that select every component have
    zero loss and exactly zero derivatives; rows that select nothing are
    unrepresentable and are dropped (g = h = 0, counted in dropped_rows)
    rather than floored, so they contribute nothing to node sums.
    """

    name = "gce"

    def __init__(self):
        self.dropped_rows = 0

    def output_dim(self, labels: np.ndarray) -> int:
        return labels.shape[1]

    def validate_labels(self, labels, n_samples: int) -> np.ndarray:
        labels = np.asarray(labels, dtype=float)
        if labels.ndim != 2 or labels.shape[0] != n_samples:
            raise ValueError("interval labels must be an (n_samples, q) 0/1 matrix")
        if not np.all((labels == 0.0) | (labels == 1.0)):
            raise ValueError("interval label entries must be 0 or 1")
        self.dropped_rows = int(np.sum(labels.sum(axis=1) == 0))
        return labels

    def batch_grad_hess(self, labels, sample_ids, cur_value, g_out, h_out):
        s = softmax(cur_value)
        y = labels[sample_ids]
        keep = y.sum(axis=1) > 0
        r = y @ s
        # guard against softmax underflow on kept rows; dropped rows are
        # overwritten with zeros below regardless of r. The clip must keep
        # r*r away from subnormal underflow, hence 1e-150 rather than tiny.
        r = np.maximum(r, 1e-150)[:, None]
        g = s * (1.0 - y / r)
        h = s * (1.0 - s) - y * s * (r - s) / (r * r)
        h = np.maximum(h, HESSIAN_FLOOR)
        g[~keep] = 0.0
        h[~keep] = 0.0
        g_out[sample_ids] = g
        h_out[sample_ids] = h


def get_loss(kind: str, n_classes: int | None = None):
    """Construct a loss object by kind string."""
    if kind == "se":
        return SquaredErrorLoss()
    if kind == "ce":
        if n_classes is None:
            raise ValueError("cross-entropy requires n_classes")
        return CrossEntropyLoss(n_classes)
    if kind == "gce":
        return GeneralizedCrossEntropyLoss()
    raise ValueError(f"unknown loss kind {kind!r}")
