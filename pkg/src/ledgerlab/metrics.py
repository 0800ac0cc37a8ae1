"""Confusion matrices, balanced recall, learning curves, and agreement stats.

The headline score everywhere is the recall average macro: the plain mean
of sensitivity (anomaly recall) and specificity, with anomalous as the
positive class.  Report files round half-up to 4 decimals for display;
JSON artifacts keep raw values.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateClassError,
    InsufficientPairsError,
    KeyMismatchError,
    LengthMismatchError,
    UndefinedClassRecallError,
)

CURVE_HEADER = ("fraction", "fold", "split", "score")
BLAND_ALTMAN_HEADER = ("mean_diff", "lower_limit", "upper_limit", "n_pairs")
DIFFERENTIAL_HEADER = ("model", "new", "baseline", "delta")

DEFAULT_CURVE_FRACTIONS = (0.1, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class ConfusionMatrix:
    tn: int
    fn: int
    fp: int
    tp: int

    def __post_init__(self) -> None:
        if min(self.tn, self.fn, self.fp, self.tp) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tn + self.fn + self.fp + self.tp


def confusion(y_true: Sequence[int], y_pred: Sequence[int]) -> ConfusionMatrix:
    """Counts with anomalous (1) as the positive class."""
    yt = np.asarray(y_true)
    yp = np.asarray(y_pred)
    if yt.shape != yp.shape:
        raise LengthMismatchError(f"lengths differ: {yt.shape} vs {yp.shape}")
    pos = yt == 1
    tp = int(np.sum(pos & (yp == 1)))
    fn = int(np.sum(pos & (yp == 0)))
    tn = int(np.sum(~pos & (yp == 0)))
    fp = int(np.sum(~pos & (yp == 1)))
    return ConfusionMatrix(tn, fn, fp, tp)


def sensitivity(cm: ConfusionMatrix) -> float:
    if cm.tp + cm.fn == 0:
        raise UndefinedClassRecallError("no positive examples: sensitivity undefined")
    return cm.tp / (cm.tp + cm.fn)


def specificity(cm: ConfusionMatrix) -> float:
    if cm.tn + cm.fp == 0:
        raise UndefinedClassRecallError("no negative examples: specificity undefined")
    return cm.tn / (cm.tn + cm.fp)


def recall_avg_macro(cm: ConfusionMatrix) -> float:
    return (sensitivity(cm) + specificity(cm)) / 2.0


def round_half_up(x: float, places: int = 4) -> float:
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(x)).quantize(quantum, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class EvalReport:
    cm: ConfusionMatrix
    sensitivity: float
    specificity: float
    recall_avg_macro: float
    model: str
    encoding: str
    seed: int

    @classmethod
    def build(
        cls, cm: ConfusionMatrix, model: str, encoding: str, seed: int
    ) -> "EvalReport":
        sens, spec = sensitivity(cm), specificity(cm)
        return cls(cm, sens, spec, (sens + spec) / 2.0, model, encoding, seed)

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "encoding": self.encoding,
            "seed": self.seed,
            "cm": {"tn": self.cm.tn, "fn": self.cm.fn, "fp": self.cm.fp, "tp": self.cm.tp},
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "recall_am": self.recall_avg_macro,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "EvalReport":
        cm = ConfusionMatrix(d["cm"]["tn"], d["cm"]["fn"], d["cm"]["fp"], d["cm"]["tp"])
        return cls(
            cm,
            float(d["sensitivity"]),
            float(d["specificity"]),
            float(d["recall_am"]),
            d["model"],
            d["encoding"],
            int(d["seed"]),
        )


def write_eval_json(report: EvalReport, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json_dict(), fh, sort_keys=True)
        fh.write("\n")


def read_eval_json(path: str) -> EvalReport:
    with open(path, encoding="utf-8") as fh:
        return EvalReport.from_json_dict(json.load(fh))


# --- learning curves ---------------------------------------------------------

@dataclass(frozen=True)
class CurvePoint:
    fraction: float
    train_scores: tuple[float, ...]
    val_scores: tuple[float, ...]

    @property
    def train_mean(self) -> float:
        return float(np.mean(self.train_scores))

    @property
    def train_sd(self) -> float:
        return float(np.std(self.train_scores, ddof=1))

    @property
    def val_mean(self) -> float:
        return float(np.mean(self.val_scores))

    @property
    def val_sd(self) -> float:
        return float(np.std(self.val_scores, ddof=1))


def _stratified_folds(y: np.ndarray, k: int, rng: np.random.Generator) -> list[np.ndarray]:
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in np.unique(y):
        idx = np.nonzero(y == cls)[0]
        if idx.shape[0] < k:
            raise DegenerateClassError(
                f"class {cls!r} has {idx.shape[0]} members, cannot build {k} folds"
            )
        idx = idx[rng.permutation(idx.shape[0])]
        for j, i in enumerate(idx):
            folds[j % k].append(int(i))
    return [np.sort(np.array(f)) for f in folds]


def _stratified_shuffle(y: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Order indices so any prefix keeps roughly the global class mix."""
    per_class: list[np.ndarray] = []
    keys: list[np.ndarray] = []
    for cls in np.unique(y):
        idx = np.nonzero(y == cls)[0]
        idx = idx[rng.permutation(idx.shape[0])]
        per_class.append(idx)
        keys.append((np.arange(idx.shape[0]) + 0.5) / idx.shape[0])
    merged = np.concatenate(per_class)
    merged_keys = np.concatenate(keys)
    return merged[np.argsort(merged_keys, kind="stable")]


def learning_curve(
    trainer: Callable[[np.ndarray, np.ndarray, np.ndarray], Callable[[np.ndarray], np.ndarray]],
    X: np.ndarray,
    y: Sequence[int],
    sample_weights: np.ndarray | None = None,
    fractions: Sequence[float] = DEFAULT_CURVE_FRACTIONS,
    k: int = 5,
    seed: int = 0,
) -> list[CurvePoint]:
    """Post-training diagnostic: k-fold curves of balanced recall vs. size.

    trainer(X, y, w) returns a predict function mapping rows to 0/1 labels.
    For each fraction, each fold trains on the leading slice of a seeded
    stratified shuffle of the fold's training portion and is scored on both
    that slice and the held-out fold.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    fr = list(fractions)
    if any(not 0 < f <= 1 for f in fr) or fr != sorted(fr):
        raise ValueError("fractions must be increasing and in (0, 1]")
    y = np.asarray(y)
    sw = np.ones(y.shape[0]) if sample_weights is None else np.asarray(sample_weights)
    folds = _stratified_folds(y, k, np.random.default_rng([seed, 0]))

    points = []
    for frac in fr:
        train_scores, val_scores = [], []
        for fold_i, val_idx in enumerate(folds):
            train_mask = np.ones(y.shape[0], dtype=bool)
            train_mask[val_idx] = False
            pool = np.nonzero(train_mask)[0]
            order = _stratified_shuffle(y[pool], np.random.default_rng([seed, 1, fold_i]))
            take = int(np.ceil(frac * pool.shape[0]))
            sub = pool[order[:take]]
            if np.unique(y[sub]).shape[0] < 2:
                raise DegenerateClassError(
                    f"fraction {frac} leaves a single class in fold {fold_i}"
                )
            predict = trainer(X[sub], y[sub], sw[sub])
            train_scores.append(recall_avg_macro(confusion(y[sub], predict(X[sub]))))
            val_scores.append(recall_avg_macro(confusion(y[val_idx], predict(X[val_idx]))))
        points.append(CurvePoint(float(frac), tuple(train_scores), tuple(val_scores)))
    return points


def write_curve_csv(points: Sequence[CurvePoint], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CURVE_HEADER)
        for p in points:
            for fold, s in enumerate(p.train_scores):
                writer.writerow([repr(p.fraction), fold, "train", repr(s)])
            for fold, s in enumerate(p.val_scores):
                writer.writerow([repr(p.fraction), fold, "validation", repr(s)])


# --- agreement statistics ------------------------------------------------------

@dataclass(frozen=True)
class BlandAltman:
    mean_diff: float
    lower_limit: float
    upper_limit: float
    n_pairs: int


def bland_altman(scores_a: Sequence[float], scores_b: Sequence[float]) -> BlandAltman:
    """Limits of agreement: mean difference +/- 1.96 sample SD."""
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatchError(f"paired lengths differ: {a.shape} vs {b.shape}")
    if a.shape[0] < 2:
        raise InsufficientPairsError("bland_altman needs at least 2 pairs")
    d = a - b
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    return BlandAltman(mean, mean - 1.96 * sd, mean + 1.96 * sd, a.shape[0])


def write_bland_altman_csv(stats: BlandAltman, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BLAND_ALTMAN_HEADER)
        writer.writerow(
            [repr(stats.mean_diff), repr(stats.lower_limit), repr(stats.upper_limit), stats.n_pairs]
        )


@dataclass(frozen=True)
class Differential:
    deltas: dict[str, float]  # model key -> new - baseline
    summary: dict[str, dict[str, float]]  # family -> {mean, min, max}


def differential_report(
    new: Mapping[str, float], baseline: Mapping[str, float]
) -> Differential:
    """Per-model deltas plus mean/min/max per family.

    Keys are model names, optionally "family/encoding"; the family half
    groups the summary.
    """
    if set(new) != set(baseline):
        raise KeyMismatchError(
            f"key sets differ: {sorted(set(new) ^ set(baseline))}"
        )
    deltas = {k: new[k] - baseline[k] for k in sorted(new)}
    by_family: dict[str, list[float]] = {}
    for k, d in deltas.items():
        family = k.split("/", 1)[0]
        by_family.setdefault(family, []).append(d)
    summary = {
        fam: {
            "mean": float(np.mean(vals)),
            "min": float(np.min(vals)),
            "max": float(np.max(vals)),
        }
        for fam, vals in by_family.items()
    }
    return Differential(deltas, summary)


def write_differential_csv(
    diff: Differential, new: Mapping[str, float], baseline: Mapping[str, float], path: str
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DIFFERENTIAL_HEADER)
        for k in sorted(diff.deltas):
            writer.writerow([k, repr(new[k]), repr(baseline[k]), repr(diff.deltas[k])])
