"""PCA with explained-variance queries for the encoder comparison.

Analysis-only: classifiers always consume unreduced features; this module
exists to compare how many components each encoding needs to retain a
variance threshold (0.99 and 0.999 by default).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encode import EncodedMatrix
from .errors import InsufficientRowsError

DEFAULT_THRESHOLDS = (0.99, 0.999)

PCA_REPORT_HEADER = ("encoding_id", "threshold", "components", "raw_dim")


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (k, d), orthonormal rows
    eigenvalues: np.ndarray  # (k,), non-increasing
    ratios: np.ndarray  # eigenvalues / total variance

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def raw_dim(self) -> int:
        return self.components.shape[1]


def fit_pca(X: EncodedMatrix | np.ndarray) -> PcaModel:
    """Centered SVD; eigenvalue_i = sigma_i^2 / (n - 1), rank-truncated."""
    values = X.values if isinstance(X, EncodedMatrix) else np.asarray(X, dtype=np.float64)
    n = values.shape[0]
    if n < 2:
        raise InsufficientRowsError("fit_pca needs at least 2 rows")
    mean = values.mean(axis=0)
    centered = values - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    eigenvalues = (s * s) / (n - 1)
    total = eigenvalues.sum()
    # Numerical rank cut, matching the usual matrix_rank tolerance.
    tol = s[0] * max(values.shape) * np.finfo(np.float64).eps if s.size else 0.0
    k = int(np.sum(s > tol))
    components = vt[:k]
    eigenvalues = eigenvalues[:k]
    ratios = eigenvalues / total if total > 0 else np.zeros(k)
    # Deterministic sign: largest-magnitude element of each component > 0.
    if k:
        flip = np.sign(components[np.arange(k), np.argmax(np.abs(components), axis=1)])
        flip[flip == 0] = 1.0
        components = components * flip[:, None]
    return PcaModel(mean, components, eigenvalues, ratios)


def components_for_variance(model: PcaModel, threshold: float) -> int:
    """Smallest k whose cumulative explained-variance ratio reaches threshold."""
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1]")
    cum = np.cumsum(model.ratios)
    hits = np.nonzero(cum >= threshold - 1e-12)[0]
    return int(hits[0]) + 1 if hits.size else model.n_components


def variance_report(
    models: Sequence[tuple[str, PcaModel]],
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> list[tuple[str, float, int, int]]:
    """Rows of (name, threshold, components, raw_dim) for each model."""
    rows = []
    for name, model in models:
        for t in thresholds:
            rows.append((name, float(t), components_for_variance(model, t), model.raw_dim))
    return rows


def write_pca_report(rows: Sequence[tuple[str, float, int, int]], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PCA_REPORT_HEADER)
        for name, threshold, k, raw_dim in rows:
            writer.writerow([name, repr(float(threshold)), k, raw_dim])
