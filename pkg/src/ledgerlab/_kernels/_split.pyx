# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled split-finding kernels: the hot inner loop of tree training.

Mirrors _split_py exactly: same scan order, same expression trees, same
strict-improvement tie-breaking, and numpy-computed grand totals, so both
backends return bit-identical splits.  Weights must be positive.
"""
import numpy as np

BACKEND = "cython"

cdef double _MIN_GAIN = 1e-12


def best_split_gini(double[:, ::1] X, const unsigned char[::1] y,
                    const double[::1] w, int min_leaf=1):
    cdef Py_ssize_t m = X.shape[0]
    cdef Py_ssize_t n_feat = X.shape[1]
    w_np = np.asarray(w)
    y_np = np.asarray(y)
    X_np = np.asarray(X)
    cdef double w_total = float(w_np.sum())
    cdef double c1_total = float((w_np * y_np).sum())
    cdef double c0_total = w_total - c1_total
    cdef double parent = w_total - (c1_total * c1_total + c0_total * c0_total) / w_total

    cdef Py_ssize_t best_feat = -1
    cdef double best_thresh = 0.0
    cdef double best_gain = _MIN_GAIN
    cdef Py_ssize_t i, j
    cdef double acc, acc1, wl, c1l, c0l, wr, c1r, c0r, child, gain, thresh
    cdef double[::1] v, ws
    cdef const unsigned char[::1] yo

    for j in range(n_feat):
        col = X_np[:, j]
        order = np.argsort(col, kind="stable")
        v = np.ascontiguousarray(col[order])
        ws = np.ascontiguousarray(w_np[order])
        yo = np.ascontiguousarray(y_np[order])
        acc = 0.0
        acc1 = 0.0
        for i in range(m - 1):
            acc = acc + ws[i]
            acc1 = acc1 + ws[i] * yo[i]
            if v[i] < v[i + 1] and i + 1 >= min_leaf and m - i - 1 >= min_leaf:
                wl = acc
                c1l = acc1
                c0l = wl - c1l
                wr = w_total - wl
                c1r = c1_total - c1l
                c0r = wr - c1r
                child = (wl - (c1l * c1l + c0l * c0l) / wl) \
                    + (wr - (c1r * c1r + c0r * c0r) / wr)
                gain = parent - child
                if gain > best_gain:
                    best_gain = gain
                    best_feat = j
                    thresh = (v[i] + v[i + 1]) / 2.0
                    if thresh >= v[i + 1]:
                        thresh = v[i]
                    best_thresh = thresh
    if best_feat < 0:
        return -1, 0.0, 0.0
    return int(best_feat), best_thresh, best_gain


def best_split_sse(double[:, ::1] X, const double[::1] r,
                   const double[::1] w, int min_leaf=1):
    cdef Py_ssize_t m = X.shape[0]
    cdef Py_ssize_t n_feat = X.shape[1]
    w_np = np.asarray(w)
    r_np = np.asarray(r)
    X_np = np.asarray(X)
    cdef double w_total = float(w_np.sum())
    cdef double s_total = float((w_np * r_np).sum())
    cdef double parent = (s_total * s_total) / w_total

    cdef Py_ssize_t best_feat = -1
    cdef double best_thresh = 0.0
    cdef double best_gain = _MIN_GAIN
    cdef Py_ssize_t i, j
    cdef double acc, accs, wl, sl, wr, sr, gain, thresh
    cdef double[::1] v, ws, ro

    for j in range(n_feat):
        col = X_np[:, j]
        order = np.argsort(col, kind="stable")
        v = np.ascontiguousarray(col[order])
        ws = np.ascontiguousarray(w_np[order])
        ro = np.ascontiguousarray(r_np[order])
        acc = 0.0
        accs = 0.0
        for i in range(m - 1):
            acc = acc + ws[i]
            accs = accs + ws[i] * ro[i]
            if v[i] < v[i + 1] and i + 1 >= min_leaf and m - i - 1 >= min_leaf:
                wl = acc
                sl = accs
                wr = w_total - wl
                sr = s_total - sl
                gain = (sl * sl) / wl + (sr * sr) / wr - parent
                if gain > best_gain:
                    best_gain = gain
                    best_feat = j
                    thresh = (v[i] + v[i + 1]) / 2.0
                    if thresh >= v[i + 1]:
                        thresh = v[i]
                    best_thresh = thresh
    if best_feat < 0:
        return -1, 0.0, 0.0
    return int(best_feat), best_thresh, best_gain
