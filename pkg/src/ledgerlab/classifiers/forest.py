"""Random forest of weighted-Gini trees.

Per-tree randomization multiplies each row's weight by an Exp(1) draw
keyed on (seed, tree index, row id) — a weighting bootstrap.  Keying on
row ids (not positions) makes predictions invariant to permuting the
training rows, and rows duplicated with halved weights reproduce the
original fit exactly, which resampling bootstraps cannot do.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tree import DecisionTree, id_keyed_uniform

DEFAULT_N_TREES = 200
DEFAULT_MAX_DEPTH = 12


@dataclass
class RandomForestModel:
    trees: list[DecisionTree]
    seed: int

    @classmethod
    def train(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        sw: np.ndarray,
        row_ids: Sequence[str],
        n_trees: int = DEFAULT_N_TREES,
        max_depth: int = DEFAULT_MAX_DEPTH,
        min_samples_leaf: int = 1,
        seed: int = 0,
    ) -> "RandomForestModel":
        n_feat = X.shape[1]
        max_features = max(1, int(math.isqrt(n_feat)))
        trees = []
        for t in range(int(n_trees)):
            u = id_keyed_uniform(row_ids, (seed, t))
            factors = -np.log1p(-u)  # Exp(1), strictly positive
            tree = DecisionTree(
                "gini",
                max_depth=int(max_depth),
                min_samples_leaf=int(min_samples_leaf),
                max_features=max_features,
                seed_path=(seed, t),
            )
            tree.fit(X, y, sw * factors)
            trees.append(tree)
        return cls(trees, seed)

    def score_rows(self, X: np.ndarray) -> np.ndarray:
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.predict_value(X)
        return total / len(self.trees)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "RandomForestModel":
        return cls([DecisionTree.from_dict(t) for t in d["trees"]], int(d["seed"]))
