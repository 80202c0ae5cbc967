"""Trees grown by second-order expansion of arbitrary smooth losses.

Quick start::

    import numpy as np
    from gradtree import TreeConfig, fit, SquaredErrorLoss

    rng = np.random.default_rng(0)
    X = rng.uniform(size=(200, 3))
    y = X[:, 0] * 2.0 + np.sin(X[:, 1])
    tree = fit(X, y, SquaredErrorLoss(), TreeConfig(max_depth=4, lambda_=0.1))
    yhat = tree.predict(X).ravel()
"""

from .baselines import BaselineConfig, fit_cart, fit_ert, fit_surv_tree
from .builder import (
    NodeStats,
    SplitResult,
    TreeConfig,
    accumulate_node_stats,
    find_best_split,
    fit,
    leaf_adjustment,
    scan_feature,
)
from .data import (
    CsvSchema,
    Dataset,
    SynthSpec,
    apply_censoring,
    generate_synthetic,
    kfold_split,
    load_csv,
    save_csv,
    weibull_event_times,
)
from .errors import (
    CsvFormatError,
    GradTreeError,
    ModelFormatError,
    NumericalError,
    UndefinedMetricError,
)
from .harness import run_bench, run_sweep, score_tree, train_tree
from .losses import (
    HESSIAN_FLOOR,
    CrossEntropyLoss,
    GeneralizedCrossEntropyLoss,
    SquaredErrorLoss,
    get_loss,
    grad_hess,
    loss_value,
    softmax,
)
from .metrics import MetricReport, c_index, r2, roc_auc
from .model_io import load_model, save_model
from .survival import (
    KMCurve,
    TimeGrid,
    build_time_grid,
    encode_survival_label,
    encode_survival_labels,
    fit_survival_tree,
    interval_probabilities,
    km_estimate,
    predict_risk,
    predict_survival_curves,
    prior_logits,
    risk_score,
    survival_curve_from_logits,
)
from .tree import Node, Tree

__version__ = "0.1.0"

__all__ = [
    "BaselineConfig",
    "CrossEntropyLoss",
    "CsvFormatError",
    "CsvSchema",
    "Dataset",
    "GeneralizedCrossEntropyLoss",
    "GradTreeError",
    "HESSIAN_FLOOR",
    "KMCurve",
    "MetricReport",
    "ModelFormatError",
    "Node",
    "NodeStats",
    "NumericalError",
    "SplitResult",
    "SquaredErrorLoss",
    "SynthSpec",
    "TimeGrid",
    "Tree",
    "TreeConfig",
    "UndefinedMetricError",
    "accumulate_node_stats",
    "apply_censoring",
    "build_time_grid",
    "c_index",
    "encode_survival_label",
    "encode_survival_labels",
    "find_best_split",
    "fit",
    "fit_cart",
    "fit_ert",
    "fit_surv_tree",
    "fit_survival_tree",
    "generate_synthetic",
    "get_loss",
    "grad_hess",
    "interval_probabilities",
    "kfold_split",
    "km_estimate",
    "leaf_adjustment",
    "load_csv",
    "load_model",
    "loss_value",
    "predict_risk",
    "predict_survival_curves",
    "prior_logits",
    "r2",
    "risk_score",
    "roc_auc",
    "run_bench",
    "run_sweep",
    "save_csv",
    "save_model",
    "scan_feature",
    "score_tree",
    "softmax",
    "survival_curve_from_logits",
    "train_tree",
    "weibull_event_times",
]
