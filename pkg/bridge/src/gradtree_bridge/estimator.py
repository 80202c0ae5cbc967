"""Scripting-level front door: configure by CLI flag names, fit, predict."""

from __future__ import annotations

import numpy as np

from gradtree.builder import TreeConfig

from .adapter import fit_with_external_loss, predict_handle

# accepted constructor keywords, named exactly like the train CLI flags
_FLAG_DEFAULTS = {
    "max_depth": 5,
    "min_samples_split": 6,
    "min_samples_leaf": 3,
    "lambda": 0.0,
    "learning_rate": 1.0,
    "threshold_mode": "exhaustive",
    "n_guess": 32,
    "seed": 0,
}


class ExternalLossTree:
    """One tree trained against a user-defined loss callback.

    Keyword arguments mirror the command-line flags (``max_depth``,
    ``min_samples_split``, ``min_samples_leaf``, ``lambda``,
    ``learning_rate``, ``threshold_mode``, ``n_guess``, ``seed``).
    Because ``lambda`` is reserved in Python source, it is accepted both
    as a literal keyword (via unpacking, e.g. ``**{"lambda": 2.0}``) and
    under the spelling ``lambda_``.
    """

    def __init__(self, callback, output_dim: int, **flags):
        if "lambda_" in flags:
            if "lambda" in flags:
                raise TypeError("pass either 'lambda' or 'lambda_', not both")
            flags["lambda"] = flags.pop("lambda_")
        unknown = sorted(set(flags) - set(_FLAG_DEFAULTS))
        if unknown:
            raise TypeError(
                f"unknown flags {unknown}; known flags: {sorted(_FLAG_DEFAULTS)}"
            )
        settings = dict(_FLAG_DEFAULTS)
        settings.update(flags)
        self.callback = callback
        self.output_dim = int(output_dim)
        self.config = TreeConfig(
            max_depth=settings["max_depth"],
            min_samples_split=settings["min_samples_split"],
            min_samples_leaf=settings["min_samples_leaf"],
            lambda_=settings["lambda"],
            learning_rate=settings["learning_rate"],
            threshold_mode=settings["threshold_mode"],
            n_guess=settings["n_guess"],
            rng_seed=settings["seed"],
        )
        self.config.validate()
        self.tree_ = None

    def fit(self, X, ys) -> "ExternalLossTree":
        self.tree_ = fit_with_external_loss(
            X, ys, self.callback, self.config, self.output_dim
        )
        return self

    def predict(self, X) -> np.ndarray:
        if self.tree_ is None:
            raise RuntimeError("fit must be called before predict")
        return predict_handle(self.tree_, X)
