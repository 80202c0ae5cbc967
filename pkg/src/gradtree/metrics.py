"""Evaluation metrics: R^2, ROC-AUC, and Harrell's concordance index."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import UndefinedMetricError


@dataclass
class MetricReport:
    name: str
    value: float
    n_samples: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "metric": self.name,
            "value": self.value,
            "n_samples": self.n_samples,
            "extra": self.extra,
        }


def r2(y_true, y_pred) -> float:
    """Coefficient of determination 1 - SS_res / SS_tot.

    Undefined (raises) when y_true is constant: SS_tot = 0.
    """
    y_true = np.asarray(y_true, dtype=float).ravel()
    y_pred = np.asarray(y_pred, dtype=float).ravel()
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred lengths differ")
    if y_true.size == 0:
        raise UndefinedMetricError("R^2 is undefined on an empty sample")
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0.0:
        raise UndefinedMetricError("R^2 is undefined for constant targets")
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    return 1.0 - ss_res / ss_tot


def _binary_auc(pos_mask: np.ndarray, scores: np.ndarray) -> float:
    """Rank-based AUC; tied scores count half, equal to pair counting."""
    n_pos = int(pos_mask.sum())
    n_neg = pos_mask.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("ROC-AUC needs both classes present")
    ranks = rankdata(scores)
    return float((ranks[pos_mask].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def roc_auc(y_true, scores) -> float:
    """ROC-AUC. Binary with 1-d scores (score of the positive class),
    binary or multiclass with an (n, C) score matrix: unweighted
    one-vs-rest macro average over the classes present in y_true."""
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=float)
    if y_true.ndim != 1 or y_true.shape[0] != scores.shape[0]:
        raise ValueError("y_true and scores lengths differ")
    if y_true.size == 0:
        raise UndefinedMetricError("ROC-AUC is undefined on an empty sample")
    if scores.ndim == 1:
        return _binary_auc(y_true == 1, scores)
    if scores.ndim != 2:
        raise ValueError("scores must be 1-d or 2-d")
    classes = np.unique(y_true)
    if classes.size < 2:
        raise UndefinedMetricError("ROC-AUC needs at least two classes present")
    if scores.shape[1] == 2 and classes.size == 2:
        return _binary_auc(y_true == classes.max(), scores[:, int(classes.max())])
    aucs = [_binary_auc(y_true == c, scores[:, int(c)]) for c in classes]
    return float(np.mean(aucs))


def concordance_counts(times, events, risks):
    """(concordant, tied, comparable) pair counts for Harrell's C.

    A pair (i, j) is comparable when t_i < t_j and sample i is observed:
    we know i's event happened first. It is concordant when the model
    assigns i the higher risk.
    """
    times = np.asarray(times, dtype=float)
    events = np.asarray(events)
    risks = np.asarray(risks, dtype=float)
    n = times.size
    concordant = 0.0
    tied = 0.0
    comparable = 0
    for i in range(n):
        if events[i] != 1:
            continue
        later = times > times[i]
        comparable += int(later.sum())
        concordant += float(np.sum(risks[i] > risks[later]))
        tied += float(np.sum(risks[i] == risks[later]))
    return concordant, tied, comparable


def c_index(times, events, risks) -> float:
    """Harrell's concordance index with half credit for tied risks."""
    concordant, tied, comparable = concordance_counts(times, events, risks)
    if comparable == 0:
        raise UndefinedMetricError("C-index is undefined with no comparable pairs")
    return float((concordant + 0.5 * tied) / comparable)
