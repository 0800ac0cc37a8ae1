"""Weighted decision trees built on the split kernels.

One tree type serves both ensembles: classification trees (weighted Gini)
for the forest, regression trees (weighted squared error) for boosting.
Feature subsampling is keyed on (tree seed, node id) so tree structure is
a function of the data multiset, not of row order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .._kernels import best_split_gini, best_split_sse

_CRITERIA = ("gini", "sse")


@dataclass
class DecisionTree:
    criterion: str
    max_depth: int
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: int | None = None  # None = all features
    seed_path: tuple[int, ...] = (0,)
    # Node arrays; feature == -1 marks a leaf.
    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)

    def fit(
        self,
        X: np.ndarray,
        target: np.ndarray,
        sw: np.ndarray,
        leaf_value_fn: Callable[[np.ndarray], float] | None = None,
    ) -> "DecisionTree":
        if self.criterion not in _CRITERIA:
            raise ValueError(f"criterion must be one of {_CRITERIA}")
        X = np.ascontiguousarray(X, dtype=np.float64)
        sw = np.ascontiguousarray(sw, dtype=np.float64)
        if self.criterion == "gini":
            target = np.ascontiguousarray(target, dtype=np.uint8)
            if leaf_value_fn is None:
                leaf_value_fn = lambda rows: float(  # noqa: E731
                    (sw[rows] * target[rows]).sum() / sw[rows].sum()
                )
        else:
            target = np.ascontiguousarray(target, dtype=np.float64)
            if leaf_value_fn is None:
                leaf_value_fn = lambda rows: float(  # noqa: E731
                    (sw[rows] * target[rows]).sum() / sw[rows].sum()
                )
        self._grow(X, target, sw, np.arange(X.shape[0]), 0, 1, leaf_value_fn)
        return self

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def _grow(
        self,
        X: np.ndarray,
        target: np.ndarray,
        sw: np.ndarray,
        rows: np.ndarray,
        depth: int,
        node_path: int,
        leaf_value_fn: Callable[[np.ndarray], float],
    ) -> int:
        node = self._new_node()
        self.value[node] = leaf_value_fn(rows)
        m = rows.shape[0]
        if (
            depth >= self.max_depth
            or m < self.min_samples_split
            or m < 2 * self.min_samples_leaf
        ):
            return node
        t_sub = target[rows]
        if t_sub.min() == t_sub.max():
            return node

        n_feat = X.shape[1]
        if self.max_features is not None and self.max_features < n_feat:
            rng = np.random.default_rng(list(self.seed_path) + [node_path])
            feats = np.sort(rng.choice(n_feat, size=self.max_features, replace=False))
        else:
            feats = np.arange(n_feat)
        X_sub = np.ascontiguousarray(X[np.ix_(rows, feats)])
        if self.criterion == "gini":
            fi, thresh, _ = best_split_gini(X_sub, t_sub, sw[rows], self.min_samples_leaf)
        else:
            fi, thresh, _ = best_split_sse(X_sub, t_sub, sw[rows], self.min_samples_leaf)
        if fi < 0:
            return node
        feat = int(feats[fi])
        go_left = X[rows, feat] <= thresh
        self.feature[node] = feat
        self.threshold[node] = float(thresh)
        self.left[node] = self._grow(
            X, target, sw, rows[go_left], depth + 1, node_path * 2, leaf_value_fn
        )
        self.right[node] = self._grow(
            X, target, sw, rows[~go_left], depth + 1, node_path * 2 + 1, leaf_value_fn
        )
        return node

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0])
        stack: list[tuple[int, np.ndarray]] = [(0, np.arange(X.shape[0]))]
        while stack:
            node, rows = stack.pop()
            if rows.size == 0:
                continue
            feat = self.feature[node]
            if feat < 0:
                out[rows] = self.value[node]
                continue
            go_left = X[rows, feat] <= self.threshold[node]
            stack.append((self.left[node], rows[go_left]))
            stack.append((self.right[node], rows[~go_left]))
        return out

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "max_depth": self.max_depth,
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "value": self.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        tree = cls(d["criterion"], int(d["max_depth"]))
        tree.feature = [int(v) for v in d["feature"]]
        tree.threshold = [float(v) for v in d["threshold"]]
        tree.left = [int(v) for v in d["left"]]
        tree.right = [int(v) for v in d["right"]]
        tree.value = [float(v) for v in d["value"]]
        return tree


def id_keyed_uniform(row_ids: Sequence[str], key: tuple[int, ...]) -> np.ndarray:
    """Per-row uniforms in (0, 1) keyed on (key, row id), order-independent."""
    import hashlib
    import struct

    key_bytes = hashlib.blake2b(
        struct.pack(f"<{len(key)}q", *key), digest_size=16
    ).digest()
    out = np.empty(len(row_ids))
    for i, rid in enumerate(row_ids):
        digest = hashlib.blake2b(rid.encode("utf-8"), digest_size=8, key=key_bytes).digest()
        out[i] = (int.from_bytes(digest, "little") + 0.5) / 2.0**64
    return out
