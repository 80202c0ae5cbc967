"""Adapter that lets a user-supplied Python function act as the loss.

The builder asks its loss object for derivatives once per node, in
batch: it hands over the full label array, the indices of the samples
sitting in the node, the node's current prediction vector, and two
writable (N, q) buffers. The callback must fill the buffer rows listed
in ``sample_ids`` and leave every other row alone. Buffers are the
builder's own arrays, not copies, so writes land directly; for the same
reason the callback must not keep references to them after returning.

Callbacks run strictly serially. The adapter holds a non-blocking lock
around each invocation, so a reentrant or concurrent call fails loudly
instead of racing.
"""

from __future__ import annotations

import threading

import numpy as np

from gradtree.builder import TreeConfig, fit
from gradtree.tree import Tree


class ExternalLossError(ValueError):
    """The callback violated its write contract."""


class CallbackLoss:
    """Loss-protocol wrapper around a (ys, sample_ids, cur_value, g_out,
    h_out) callback.

    ``output_dim`` must be declared up front; with an opaque function
    there is nothing to infer it from. ``invocations`` counts completed
    callback runs and is the node-evaluation index used in error
    messages (evaluation 1 is the root's init-point pass).
    """

    name = "external"

    def __init__(self, callback, output_dim: int):
        if not callable(callback):
            raise TypeError("callback must be callable")
        q = int(output_dim)
        if q < 1:
            raise ValueError("output_dim must be >= 1")
        self._callback = callback
        self._q = q
        self._gate = threading.Lock()
        self.invocations = 0

    def output_dim(self, labels) -> int:
        return self._q

    def validate_labels(self, labels, n_samples: int):
        ys = np.asarray(labels)
        if ys.shape[0] != n_samples:
            raise ValueError(
                f"labels have leading dimension {ys.shape[0]}, expected {n_samples}"
            )
        return ys

    def batch_grad_hess(self, labels, sample_ids, cur_value, g_out, h_out) -> None:
        if not self._gate.acquire(blocking=False):
            raise ExternalLossError("external loss callback reentered")
        try:
            self.invocations += 1
            self._callback(labels, sample_ids, cur_value, g_out, h_out)
        finally:
            self._gate.release()
        self._check_written(sample_ids, g_out, "gradient")
        self._check_written(sample_ids, h_out, "hessian")

    def _check_written(self, sample_ids, buf, what: str) -> None:
        rows = buf[sample_ids]
        if np.all(np.isfinite(rows)):
            return
        bad = np.where(~np.isfinite(rows).all(axis=1))[0][0]
        raise ExternalLossError(
            f"external loss wrote a non-finite {what} at node evaluation "
            f"{self.invocations}, sample {int(np.asarray(sample_ids)[bad])}"
        )


def fit_with_external_loss(X, ys, callback, config: TreeConfig, output_dim: int) -> Tree:
    """Grow a tree with derivatives supplied by ``callback``.

    A callback exception aborts the fit and propagates unchanged. The
    returned tree carries loss name "external" in its metadata and is
    otherwise a plain gradtree model.
    """
    loss = CallbackLoss(callback, output_dim)
    return fit(X, ys, loss, config)


def predict_handle(tree: Tree, X) -> np.ndarray:
    """Prediction matrix of a fitted handle; (0, q) for empty input."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-d array")
    if X.shape[1] != tree.n_features:
        raise ValueError(
            f"X has {X.shape[1]} features, tree was grown on {tree.n_features}"
        )
    return tree.predict(X)
