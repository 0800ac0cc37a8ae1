"""Five classifier families under one fit/predict contract."""
from .base import (
    FAMILIES,
    ClassifierSpec,
    TrainedClassifier,
    fit,
    load_model,
    predict_labels,
    predict_scores,
    save_model,
    to_binary,
)
from .linear import LinearSvmModel, LogisticRegressionModel, lr_loss_grad

__all__ = [
    "FAMILIES",
    "ClassifierSpec",
    "TrainedClassifier",
    "fit",
    "predict_scores",
    "predict_labels",
    "save_model",
    "load_model",
    "to_binary",
    "lr_loss_grad",
    "LogisticRegressionModel",
    "LinearSvmModel",
]
