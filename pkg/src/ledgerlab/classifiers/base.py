"""Common contract for the five classifier families.

All families train on an EncodedMatrix (or a bare ndarray), binary labels
with "anomalous" as the positive class, and per-class weights.  Training
rows are canonicalized by sorting on stable row ids first, so any internal
randomness (bootstrap factors, feature subsets, batch shuffles) is keyed
on ids rather than positions and predictions are invariant to permuting
the training rows.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..encode import EncodedMatrix
from ..errors import (
    DimensionMismatchError,
    NonFiniteInputError,
    SingleClassError,
)
from ..ledger import LABEL_ANOMALOUS, LABEL_NORMAL
from ..sampling import ClassWeights

FAMILIES = ("lr", "rf", "gbm", "svm", "ann", "dnn1", "dnn2")

MODEL_FORMAT_VERSION = 1

# Hyperparameter domains per family; specs reject names outside these.
PARAM_DOMAINS: dict[str, dict[str, tuple[float, float] | tuple]] = {
    "lr": {"C": (1e-6, 1e4), "tol": (0.0, 1.0), "max_iter": (1, 1_000_000)},
    "svm": {"C": (1e-6, 1e4), "lr0": (1e-6, 10.0), "n_iter": (1, 1_000_000)},
    "rf": {
        "n_trees": (1, 5000),
        "max_depth": (1, 64),
        "min_samples_leaf": (1, 1000),
    },
    "gbm": {
        "learning_rate": (1e-9, 1.0),
        "n_rounds": (1, 5000),
        "max_depth": (1, 64),
        "min_samples_leaf": (1, 1000),
    },
}
_NN_DOMAINS = {
    "learning_rate": (1e-6, 1.0),
    "batch_size": (1, 65536),
    "epochs": (1, 10_000),
    "patience": (1, 10_000),
    "val_fraction": (0.01, 0.5),
}
PARAM_DOMAINS["ann"] = dict(_NN_DOMAINS)
PARAM_DOMAINS["dnn1"] = dict(_NN_DOMAINS)
PARAM_DOMAINS["dnn2"] = dict(_NN_DOMAINS)


@dataclass(frozen=True)
class ClassifierSpec:
    family: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(
                f"unknown family {self.family!r}; valid: {', '.join(FAMILIES)}"
            )
        domains = PARAM_DOMAINS[self.family]
        for name, value in self.hyperparameters.items():
            if name not in domains:
                raise ValueError(f"{self.family}: unknown hyperparameter {name!r}")
            lo, hi = domains[name]
            if not lo <= value <= hi:
                raise ValueError(
                    f"{self.family}.{name}={value!r} outside [{lo}, {hi}]"
                )


def to_binary(labels: Sequence) -> np.ndarray:
    """Map labels to {0, 1} ints with 'anomalous' (or 1) as positive."""
    out = np.empty(len(labels), dtype=np.uint8)
    for i, lab in enumerate(labels):
        if lab in (LABEL_ANOMALOUS, 1, True):
            out[i] = 1
        elif lab in (LABEL_NORMAL, 0, False):
            out[i] = 0
        else:
            raise ValueError(f"label {lab!r} is not binary")
    return out


def _as_values_ids(X) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(X, EncodedMatrix):
        return X.values, X.row_ids
    values = np.asarray(X, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError("X must be 2-D")
    return values, tuple(str(i) for i in range(values.shape[0]))


def _sample_weights(
    labels: Sequence, y: np.ndarray, weights: ClassWeights | Mapping | None
) -> np.ndarray:
    if weights is None:
        return np.ones(y.shape[0])
    table = weights.weight_per_class if isinstance(weights, ClassWeights) else dict(weights)
    out = np.empty(y.shape[0])
    for i, lab in enumerate(labels):
        if lab in table:
            out[i] = table[lab]
        else:
            # Fall back to the binary name when labels came in as ints.
            name = LABEL_ANOMALOUS if y[i] else LABEL_NORMAL
            if name not in table:
                raise ValueError(f"no class weight for label {lab!r}")
            out[i] = table[name]
    return out


@dataclass
class TrainedClassifier:
    family: str
    spec: ClassifierSpec
    impl: object  # family-specific fitted model
    feature_dim: int
    threshold: float = 0.5

    def predict_scores(self, X) -> np.ndarray:
        values, _ = _as_values_ids(X)
        if values.shape[1] != self.feature_dim:
            raise DimensionMismatchError(
                f"model expects dim {self.feature_dim}, got {values.shape[1]}"
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteInputError("prediction input contains non-finite values")
        return self.impl.score_rows(values)

    def predict_labels(self, X, threshold: float | None = None) -> np.ndarray:
        t = self.threshold if threshold is None else threshold
        # Ties go to the positive (anomalous) class.
        return (self.predict_scores(X) >= t).astype(np.uint8)


def fit(
    spec: ClassifierSpec,
    X,
    y: Sequence,
    weights: ClassWeights | Mapping | None = None,
) -> TrainedClassifier:
    """Train one model; deterministic given (spec.seed, inputs)."""
    from . import boosting, linear, nn  # local import to avoid cycles
    from . import forest

    values, row_ids = _as_values_ids(X)
    if not np.all(np.isfinite(values)):
        raise NonFiniteInputError("training input contains non-finite values")
    if len(y) != values.shape[0]:
        raise ValueError(f"|y| = {len(y)} but X has {values.shape[0]} rows")
    y_bin = to_binary(y)
    if y_bin.min() == y_bin.max():
        raise SingleClassError("training data contains a single class")
    sw = _sample_weights(list(y), y_bin, weights)

    # Canonical row order: stable sort on row ids.
    order = np.argsort(np.asarray(row_ids), kind="stable")
    values = np.ascontiguousarray(values[order], dtype=np.float64)
    y_bin = y_bin[order]
    sw = sw[order]
    ids_sorted = tuple(row_ids[i] for i in order)

    hp = dict(spec.hyperparameters)
    if spec.family == "lr":
        impl = linear.LogisticRegressionModel.train(values, y_bin, sw, seed=spec.seed, **hp)
    elif spec.family == "svm":
        impl = linear.LinearSvmModel.train(values, y_bin, sw, seed=spec.seed, **hp)
    elif spec.family == "rf":
        impl = forest.RandomForestModel.train(
            values, y_bin, sw, ids_sorted, seed=spec.seed, **hp
        )
    elif spec.family == "gbm":
        impl = boosting.GradientBoostingModel.train(values, y_bin, sw, seed=spec.seed, **hp)
    else:
        impl = nn.NeuralNetModel.train(
            values, y_bin, sw, family=spec.family, seed=spec.seed, **hp
        )
    return TrainedClassifier(spec.family, spec, impl, values.shape[1])


def predict_scores(model: TrainedClassifier, X) -> np.ndarray:
    return model.predict_scores(X)


def predict_labels(model: TrainedClassifier, X, threshold: float = 0.5) -> np.ndarray:
    return model.predict_labels(X, threshold)


# --- persistence -------------------------------------------------------------

def save_model(model: TrainedClassifier, path: str) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "family": model.family,
        "spec": {
            "family": model.spec.family,
            "hyperparameters": model.spec.hyperparameters,
            "seed": model.spec.seed,
        },
        "feature_dim": model.feature_dim,
        "threshold": model.threshold,
        "parameters": model.impl.to_dict(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_model(path: str) -> TrainedClassifier:
    from . import boosting, linear, nn
    from . import forest

    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported model format {payload.get('format_version')}")
    family = payload["family"]
    spec = ClassifierSpec(
        payload["spec"]["family"],
        dict(payload["spec"]["hyperparameters"]),
        int(payload["spec"]["seed"]),
    )
    if family == "lr":
        impl = linear.LogisticRegressionModel.from_dict(payload["parameters"])
    elif family == "svm":
        impl = linear.LinearSvmModel.from_dict(payload["parameters"])
    elif family == "rf":
        impl = forest.RandomForestModel.from_dict(payload["parameters"])
    elif family == "gbm":
        impl = boosting.GradientBoostingModel.from_dict(payload["parameters"])
    else:
        impl = nn.NeuralNetModel.from_dict(payload["parameters"])
    return TrainedClassifier(
        family, spec, impl, int(payload["feature_dim"]), float(payload["threshold"])
    )
