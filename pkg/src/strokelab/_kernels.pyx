# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Every function here has a numpy twin in ``_kernels_py`` with the same
signature and the same tie-breaking rules; ``strokelab.kernels`` picks one
at import time.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, fabs, pow, INFINITY, NAN

cnp.import_array()

ctypedef cnp.float64_t f64
ctypedef cnp.int64_t i64

cdef double TIE_RTOL = 1e-12


cdef inline double _node_impurity(double w_pos, double w_tot, int criterion) nogil:
    cdef double p, q
    if w_tot <= 0.0:
        return 0.0
    p = w_pos / w_tot
    if p < 0.0:
        p = 0.0
    elif p > 1.0:
        p = 1.0
    q = 1.0 - p
    if criterion == 0:
        return 1.0 - (p * p + q * q)
    cdef double h = 0.0
    if p > 0.0:
        h -= p * log(p)
    if q > 0.0:
        h -= q * log(q)
    return h / log(2.0)


cdef tuple _pick(f64[::1] cand, const f64[::1] x):
    cdef Py_ssize_t m = cand.shape[0], i
    cdef double lo = INFINITY
    for i in range(m):
        if cand[i] < lo:
            lo = cand[i]
    if lo == INFINITY:
        return INFINITY, NAN
    cdef double cut = lo + TIE_RTOL * (1.0 + fabs(lo))
    for i in range(m):
        if cand[i] <= cut:
            return cand[i], 0.5 * (x[i] + x[i + 1])
    return INFINITY, NAN


def best_split_classification(const f64[::1] x, const f64[::1] y, const f64[::1] w,
                              int criterion, int min_leaf):
    """Best threshold on one presorted feature for a weighted binary target.

    Returns ``(child_impurity, threshold)``; ``(inf, nan)`` when no split
    separates distinct values with ``min_leaf`` rows on each side. Among
    near-equal candidates (relative 1e-12) the leftmost wins.
    """
    cdef Py_ssize_t n = x.shape[0], i
    cdef double w_tot = 0.0, pos_tot = 0.0
    cdef double wl = 0.0, pl = 0.0, wr, pr
    if n < 2:
        return INFINITY, NAN
    cand_arr = np.full(n - 1, np.inf)
    cdef f64[::1] cand = cand_arr
    for i in range(n):
        w_tot += w[i]
        pos_tot += w[i] * y[i]
    if w_tot <= 0.0:
        return INFINITY, NAN
    with nogil:
        for i in range(n - 1):
            wl += w[i]
            pl += w[i] * y[i]
            if x[i] >= x[i + 1]:
                continue
            if i + 1 < min_leaf or n - i - 1 < min_leaf:
                continue
            wr = w_tot - wl
            pr = pos_tot - pl
            cand[i] = (wl * _node_impurity(pl, wl, criterion)
                       + wr * _node_impurity(pr, wr, criterion)) / w_tot
    return _pick(cand, x)


def best_split_regression(const f64[::1] x, const f64[::1] r, int min_leaf):
    """Best threshold on one presorted feature for squared error.

    Returns ``(child_sse, threshold)`` with the same conventions as the
    classification search.
    """
    cdef Py_ssize_t n = x.shape[0], i
    cdef double s_tot = 0.0, q_tot = 0.0, sl = 0.0, sr, nl, nr
    if n < 2:
        return INFINITY, NAN
    cand_arr = np.full(n - 1, np.inf)
    cdef f64[::1] cand = cand_arr
    for i in range(n):
        s_tot += r[i]
        q_tot += r[i] * r[i]
    with nogil:
        for i in range(n - 1):
            sl += r[i]
            if x[i] >= x[i + 1]:
                continue
            if i + 1 < min_leaf or n - i - 1 < min_leaf:
                continue
            nl = <double>(i + 1)
            nr = <double>(n - i - 1)
            sr = s_tot - sl
            cand[i] = q_tot - (sl * sl / nl + sr * sr / nr)
    return _pick(cand, x)


def knn_search(const f64[:, ::1] Q, const f64[:, ::1] R, int k, double p, bint skip_self):
    """k nearest rows of ``R`` for every row of ``Q`` under Minkowski-p distance.

    Ties go to the lower index. With ``skip_self`` query ``i`` never returns
    reference ``i`` (``Q`` and ``R`` are then the same matrix).
    """
    cdef Py_ssize_t nq = Q.shape[0], nr = R.shape[0], d = Q.shape[1]
    cdef Py_ssize_t i, j, f, pos
    cdef double dist, diff
    if R.shape[1] != d:
        raise ValueError("dimension mismatch")
    if k > nr - (1 if skip_self else 0):
        raise ValueError("k exceeds the number of reference rows")
    idx_arr = np.full((nq, k), -1, dtype=np.int64)
    dst_arr = np.full((nq, k), np.inf, dtype=np.float64)
    cdef i64[:, ::1] idx = idx_arr
    cdef f64[:, ::1] dst = dst_arr
    with nogil:
        for i in range(nq):
            for j in range(nr):
                if skip_self and i == j:
                    continue
                dist = 0.0
                if p == 2.0:
                    for f in range(d):
                        diff = Q[i, f] - R[j, f]
                        dist += diff * diff
                    dist = sqrt(dist)
                elif p == 1.0:
                    for f in range(d):
                        dist += fabs(Q[i, f] - R[j, f])
                else:
                    for f in range(d):
                        dist += pow(fabs(Q[i, f] - R[j, f]), p)
                    dist = pow(dist, 1.0 / p)
                if dist >= dst[i, k - 1]:
                    continue
                pos = k - 1
                while pos > 0 and dst[i, pos - 1] > dist:
                    dst[i, pos] = dst[i, pos - 1]
                    idx[i, pos] = idx[i, pos - 1]
                    pos -= 1
                dst[i, pos] = dist
                idx[i, pos] = j
    return idx_arr, dst_arr


def sgd_hinge_epoch(const f64[:, ::1] X, const f64[::1] y_pm, f64[::1] w, double b,
                    const i64[::1] order, double alpha, double step, double t0):
    """One pass of L2-regularized hinge-loss SGD, updating ``w`` in place.

    Step size decays as ``step / (1 + t / n)``; ``t0`` is the update
    count before this epoch. Returns ``(b, mean_hinge_loss)`` where each
    sample's loss is taken before its own update.
    """
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], ii, i, f
    cdef double margin, eta, loss = 0.0, t = t0, shrink
    with nogil:
        for ii in range(n):
            i = order[ii]
            margin = b
            for f in range(d):
                margin += w[f] * X[i, f]
            margin *= y_pm[i]
            eta = step / (1.0 + t / n)
            shrink = 1.0 - eta * alpha
            for f in range(d):
                w[f] *= shrink
            if margin < 1.0:
                loss += 1.0 - margin
                for f in range(d):
                    w[f] += eta * y_pm[i] * X[i, f]
                b += eta * y_pm[i]
            t += 1.0
    return b, loss / n
