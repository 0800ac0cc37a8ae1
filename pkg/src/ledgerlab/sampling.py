"""Stratified train/test splitting and class weighting for imbalanced labels."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateClassError

DEFAULT_TEST_FRACTION = 0.2

SCHEME_BALANCED = "balanced"
SCHEME_UNIFORM = "uniform"
SCHEME_CUSTOM = "custom"


@dataclass(frozen=True)
class SplitResult:
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    seed: int
    test_fraction: float


@dataclass(frozen=True)
class ClassWeights:
    weight_per_class: dict[str, float]
    scheme: str

    def __post_init__(self) -> None:
        if any(w <= 0 for w in self.weight_per_class.values()):
            raise ValueError("class weights must be positive")

    def per_sample(self, labels: Sequence[str]) -> np.ndarray:
        return np.array([self.weight_per_class[label] for label in labels])


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def stratified_split(
    labels: Sequence[str],
    test_fraction: float = DEFAULT_TEST_FRACTION,
    seed: int = 0,
) -> SplitResult:
    """Per-class seeded shuffle; the first round(fraction * n_c) go to test.

    Every class keeps at least one member on each side, so both splits see
    both classes.  Classes are processed in order of first appearance,
    which makes the split invariant to renaming the labels.
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must be in (0, 1)")
    labels = list(labels)
    class_order: list[str] = []
    members: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        if lab not in members:
            members[lab] = []
            class_order.append(lab)
        members[lab].append(i)

    for lab in class_order:
        if len(members[lab]) < 2:
            raise DegenerateClassError(f"class {lab!r} has fewer than 2 members")

    rng = np.random.default_rng(seed)
    test: list[int] = []
    for lab in class_order:
        idx = np.array(members[lab])
        n_c = idx.shape[0]
        n_test = _round_half_up(test_fraction * n_c)
        n_test = max(1, min(n_test, n_c - 1))
        perm = rng.permutation(n_c)
        test.extend(idx[perm[:n_test]].tolist())

    test_set = set(test)
    train = [i for i in range(len(labels)) if i not in test_set]
    return SplitResult(tuple(train), tuple(sorted(test)), seed, test_fraction)


def class_weights(labels: Sequence[str], scheme: str = SCHEME_BALANCED) -> ClassWeights:
    """Balanced: w_c = N / (K * N_c); uniform: all ones."""
    labels = list(labels)
    counts: dict[str, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    if not counts:
        raise ValueError("labels must be non-empty")
    if scheme == SCHEME_UNIFORM:
        return ClassWeights({c: 1.0 for c in counts}, scheme)
    if scheme == SCHEME_BALANCED:
        n, k = len(labels), len(counts)
        return ClassWeights({c: n / (k * n_c) for c, n_c in counts.items()}, scheme)
    raise ValueError(f"unknown scheme {scheme!r}")


def custom_weights(weight_per_class: Mapping[str, float]) -> ClassWeights:
    return ClassWeights(dict(weight_per_class), SCHEME_CUSTOM)


# --- split.json persistence ---------------------------------------------------

def write_split_json(split: SplitResult, ids: Sequence[str], path: str) -> None:
    payload = {
        "seed": split.seed,
        "test_fraction": split.test_fraction,
        "train_ids": [ids[i] for i in split.train_indices],
        "test_ids": [ids[i] for i in split.test_indices],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=0)
        fh.write("\n")


def read_split_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    required = {"seed", "test_fraction", "train_ids", "test_ids"}
    if not required <= set(payload):
        raise ValueError(f"{path}: split file missing keys {sorted(required - set(payload))}")
    return payload


def split_indices_for_ids(
    payload: dict, ids: Sequence[str]
) -> tuple[np.ndarray, np.ndarray]:
    """Map a split file's id lists onto positions in the given id sequence."""
    pos = {rid: i for i, rid in enumerate(ids)}
    missing = [rid for rid in payload["train_ids"] + payload["test_ids"] if rid not in pos]
    if missing:
        raise ValueError(f"split file references unknown ids, e.g. {missing[:3]}")
    train = np.array([pos[rid] for rid in payload["train_ids"]], dtype=int)
    test = np.array([pos[rid] for rid in payload["test_ids"]], dtype=int)
    return train, test
