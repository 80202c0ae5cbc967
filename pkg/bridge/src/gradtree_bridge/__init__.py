"""Callback bridge: drive the gradtree builder with losses defined as
plain Python functions. See adapter.CallbackLoss for the contract."""

from .adapter import (
    CallbackLoss,
    ExternalLossError,
    fit_with_external_loss,
    predict_handle,
)
from .estimator import ExternalLossTree

__all__ = [
    "CallbackLoss",
    "ExternalLossError",
    "ExternalLossTree",
    "fit_with_external_loss",
    "predict_handle",
]
