"""Pure numpy versions of the compiled kernels.

Running sums use ``np.cumsum`` (sequential accumulation) so candidate
values track the compiled loops to the last few ulps.
"""
import numpy as np

TIE_RTOL = 1e-12
_LOG2 = np.log(2.0)


def _impurity(w_pos, w_tot, criterion):
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(w_tot > 0, w_pos / np.where(w_tot > 0, w_tot, 1.0), 0.0)
    p = np.clip(p, 0.0, 1.0)
    q = 1.0 - p
    if criterion == 0:
        return 1.0 - (p * p + q * q)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
        h -= np.where(q > 0, q * np.log(np.where(q > 0, q, 1.0)), 0.0)
    return h / _LOG2


def _valid_positions(x, min_leaf):
    n = x.shape[0]
    left = np.arange(1, n)
    return (x[:-1] < x[1:]) & (left >= min_leaf) & (n - left >= min_leaf)


def _pick(cand, x):
    if cand.size == 0:
        return np.inf, np.nan
    lo = cand.min()
    if lo == np.inf:
        return np.inf, np.nan
    i = int(np.flatnonzero(cand <= lo + TIE_RTOL * (1.0 + abs(lo)))[0])
    return float(cand[i]), 0.5 * (x[i] + x[i + 1])


def best_split_classification(x, y, w, criterion, min_leaf):
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    if n < 2:
        return np.inf, np.nan
    cw = np.cumsum(w)
    cp = np.cumsum(w * y)
    w_tot, pos_tot = cw[-1], cp[-1]
    if w_tot <= 0:
        return np.inf, np.nan
    wl, pl = cw[:-1], cp[:-1]
    wr, pr = w_tot - wl, pos_tot - pl
    cand = (wl * _impurity(pl, wl, criterion) + wr * _impurity(pr, wr, criterion)) / w_tot
    cand = np.where(_valid_positions(x, min_leaf), cand, np.inf)
    return _pick(cand, x)


def best_split_regression(x, r, min_leaf):
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    if n < 2:
        return np.inf, np.nan
    cs = np.cumsum(r)
    q_tot = np.cumsum(r * r)[-1]
    s_tot = cs[-1]
    sl = cs[:-1]
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    sr = s_tot - sl
    cand = q_tot - (sl * sl / nl + sr * sr / nr)
    cand = np.where(_valid_positions(x, min_leaf), cand, np.inf)
    return _pick(cand, x)


def _distances(Q, R, p):
    diff = np.abs(Q[:, None, :] - R[None, :, :])
    if p == 2.0:
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    if p == 1.0:
        return diff.sum(axis=2)
    return (diff ** p).sum(axis=2) ** (1.0 / p)


def knn_search(Q, R, k, p, skip_self):
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    R = np.ascontiguousarray(R, dtype=np.float64)
    if Q.shape[1] != R.shape[1]:
        raise ValueError("dimension mismatch")
    if k > R.shape[0] - (1 if skip_self else 0):
        raise ValueError("k exceeds the number of reference rows")
    nq = Q.shape[0]
    idx = np.empty((nq, k), dtype=np.int64)
    dst = np.empty((nq, k), dtype=np.float64)
    chunk = max(1, 2_000_000 // max(1, R.shape[0] * Q.shape[1]))
    for s in range(0, nq, chunk):
        d = _distances(Q[s:s + chunk], R, p)
        if skip_self:
            rows = np.arange(d.shape[0])
            d[rows, rows + s] = np.inf
        order = np.argsort(d, axis=1, kind="stable")[:, :k]
        idx[s:s + chunk] = order
        dst[s:s + chunk] = np.take_along_axis(d, order, axis=1)
    return idx, dst


def sgd_hinge_epoch(X, y_pm, w, b, order, alpha, step, t0):
    n = X.shape[0]
    t = float(t0)
    loss = 0.0
    for i in order:
        xi = X[i]
        margin = y_pm[i] * (b + float(w @ xi))
        eta = step / (1.0 + t / n)
        w *= 1.0 - eta * alpha
        if margin < 1.0:
            loss += 1.0 - margin
            w += (eta * y_pm[i]) * xi
            b += eta * y_pm[i]
        t += 1.0
    return b, loss / n
