"""Pure-numpy split-finding kernels (fallback for the compiled extension).

Both backends must agree: same scan order (features ascending, thresholds
ascending), same strict-improvement tie-breaking, and the same expression
trees so results match bit-for-bit.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"

_MIN_GAIN = 1e-12


def _candidate_cuts(v: np.ndarray, m: int, min_leaf: int) -> np.ndarray:
    cuts = np.nonzero(v[:-1] < v[1:])[0]
    if min_leaf > 1:
        cuts = cuts[(cuts + 1 >= min_leaf) & (m - cuts - 1 >= min_leaf)]
    return cuts


def best_split_gini(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, min_leaf: int = 1
) -> tuple[int, float, float]:
    """Best weighted-Gini split over all columns of X.

    Returns (feature, threshold, gain); feature is -1 when no cut improves
    the parent impurity.  Rows go left when value <= threshold.
    """
    m, n_feat = X.shape
    w_total = float(w.sum())
    c1_total = float((w * y).sum())
    c0_total = w_total - c1_total
    parent = w_total - (c1_total * c1_total + c0_total * c0_total) / w_total

    best_feat, best_thresh, best_gain = -1, 0.0, _MIN_GAIN
    for j in range(n_feat):
        col = X[:, j]
        order = np.argsort(col, kind="stable")
        v = col[order]
        cuts = _candidate_cuts(v, m, min_leaf)
        if cuts.size == 0:
            continue
        ws = w[order]
        cw = np.cumsum(ws)
        cwy = np.cumsum(ws * y[order])
        wl = cw[cuts]
        c1l = cwy[cuts]
        c0l = wl - c1l
        wr = w_total - wl
        c1r = c1_total - c1l
        c0r = wr - c1r
        child = (wl - (c1l * c1l + c0l * c0l) / wl) + (wr - (c1r * c1r + c0r * c0r) / wr)
        gains = parent - child
        k = int(np.argmax(gains))
        if gains[k] > best_gain:
            best_gain = float(gains[k])
            best_feat = j
            i = int(cuts[k])
            thresh = (v[i] + v[i + 1]) / 2.0
            if thresh >= v[i + 1]:
                thresh = v[i]
            best_thresh = float(thresh)
    if best_feat < 0:
        return -1, 0.0, 0.0
    return best_feat, best_thresh, best_gain


def best_split_sse(
    X: np.ndarray, r: np.ndarray, w: np.ndarray, min_leaf: int = 1
) -> tuple[int, float, float]:
    """Best weighted squared-error split (variance-reduction proxy)."""
    m, n_feat = X.shape
    w_total = float(w.sum())
    s_total = float((w * r).sum())
    parent = (s_total * s_total) / w_total

    best_feat, best_thresh, best_gain = -1, 0.0, _MIN_GAIN
    for j in range(n_feat):
        col = X[:, j]
        order = np.argsort(col, kind="stable")
        v = col[order]
        cuts = _candidate_cuts(v, m, min_leaf)
        if cuts.size == 0:
            continue
        ws = w[order]
        cw = np.cumsum(ws)
        cwr = np.cumsum(ws * r[order])
        wl = cw[cuts]
        sl = cwr[cuts]
        wr = w_total - wl
        sr = s_total - sl
        gains = (sl * sl) / wl + (sr * sr) / wr - parent
        k = int(np.argmax(gains))
        if gains[k] > best_gain:
            best_gain = float(gains[k])
            best_feat = j
            i = int(cuts[k])
            thresh = (v[i] + v[i + 1]) / 2.0
            if thresh >= v[i + 1]:
                thresh = v[i]
            best_thresh = float(thresh)
    if best_feat < 0:
        return -1, 0.0, 0.0
    return best_feat, best_thresh, best_gain
