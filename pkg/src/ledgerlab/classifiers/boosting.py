"""Gradient boosting on binomial deviance with depth-limited regression trees.

Fully deterministic: the base score is the logit of the weighted positive
rate, each round fits a tree to the weighted negative gradient (y - p),
and leaf values take a Newton step.  All statistics are weighted sums, so
duplicating every row with halved weights reproduces the model exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linear import _sigmoid
from .tree import DecisionTree

DEFAULT_LEARNING_RATE = 0.1
DEFAULT_N_ROUNDS = 200
DEFAULT_MAX_DEPTH = 3

_HESS_FLOOR = 1e-12


@dataclass
class GradientBoostingModel:
    base_score: float  # logit of the weighted prior
    learning_rate: float
    trees: list[DecisionTree]
    seed: int

    @classmethod
    def train(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        sw: np.ndarray,
        learning_rate: float = DEFAULT_LEARNING_RATE,
        n_rounds: int = DEFAULT_N_ROUNDS,
        max_depth: int = DEFAULT_MAX_DEPTH,
        min_samples_leaf: int = 1,
        seed: int = 0,
    ) -> "GradientBoostingModel":
        y_f = y.astype(np.float64)
        p_bar = float((sw * y_f).sum() / sw.sum())
        p_bar = min(max(p_bar, 1e-12), 1.0 - 1e-12)
        base = float(np.log(p_bar / (1.0 - p_bar)))
        raw = np.full(X.shape[0], base)
        trees: list[DecisionTree] = []
        for _ in range(int(n_rounds)):
            p = _sigmoid(raw)
            residual = y_f - p
            hess = p * (1.0 - p)

            def leaf_value(rows: np.ndarray) -> float:
                num = float((sw[rows] * residual[rows]).sum())
                den = float((sw[rows] * hess[rows]).sum())
                return num / max(den, _HESS_FLOOR)

            tree = DecisionTree(
                "sse", max_depth=int(max_depth), min_samples_leaf=int(min_samples_leaf)
            )
            tree.fit(X, residual, sw, leaf_value_fn=leaf_value)
            trees.append(tree)
            raw = raw + learning_rate * tree.predict_value(X)
        return cls(base, float(learning_rate), trees, seed)

    def score_rows(self, X: np.ndarray) -> np.ndarray:
        raw = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            raw = raw + self.learning_rate * tree.predict_value(X)
        return _sigmoid(raw)

    def to_dict(self) -> dict:
        return {
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GradientBoostingModel":
        return cls(
            float(d["base_score"]),
            float(d["learning_rate"]),
            [DecisionTree.from_dict(t) for t in d["trees"]],
            int(d["seed"]),
        )
