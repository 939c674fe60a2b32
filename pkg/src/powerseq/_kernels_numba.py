"""Numba builds of the distance kernels.

Signatures mirror ``_kernels_numpy``; point-cost codes: 0 = squared,
1 = absolute.  Accumulation order is the plain left-to-right loop so that
results are reproducible and comparable against literal re-implementations.
``fastmath`` stays off for that reason.
"""

from __future__ import annotations

import numpy as np
from numba import njit

COST_SQUARED = 0
COST_ABS = 1


@njit(cache=True)
def _point_cost(a: float, b: float, cost_code: int) -> float:
    d = a - b
    if cost_code == COST_ABS:
        return abs(d)
    return d * d


@njit(cache=True)
def dtw_pair(x, y, w, cost_code):
    n = x.shape[0]
    m = y.shape[0]
    inf = np.inf
    prev = np.full(m + 1, inf)
    cur = np.full(m + 1, inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        lo = i - w
        if lo < 1:
            lo = 1
        hi = i + w
        if hi > m:
            hi = m
        cur[:] = inf
        for j in range(lo, hi + 1):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = best + _point_cost(x[i - 1], y[j - 1], cost_code)
        tmp = prev
        prev = cur
        cur = tmp
    return prev[m]


@njit(cache=True)
def dtw_many(queries, candidates, w, cost_code):
    out = np.empty((queries.shape[0], candidates.shape[0]))
    for a in range(queries.shape[0]):
        for b in range(candidates.shape[0]):
            out[a, b] = dtw_pair(queries[a], candidates[b], w, cost_code)
    return out


@njit(cache=True)
def dtw_pairs(xs, ys, w, cost_code):
    out = np.empty(xs.shape[0])
    for a in range(xs.shape[0]):
        out[a] = dtw_pair(xs[a], ys[a], w, cost_code)
    return out


@njit(cache=True)
def ltw_pair(x, y, ks):
    n = x.shape[0]
    total = 0.0
    for idx in range(ks.shape[0]):
        k = ks[idx]
        s = 0.0
        for i in range(k, n - k):
            a = abs(x[i] - y[i])
            b = abs(x[i] - y[i + 1])
            c = abs(x[i] - y[i + k])
            m = a
            if b < m:
                m = b
            if c < m:
                m = c
            s += m
        total += s
    return total


@njit(cache=True)
def ltw_many(queries, candidates, ks):
    out = np.empty((queries.shape[0], candidates.shape[0]))
    for a in range(queries.shape[0]):
        for b in range(candidates.shape[0]):
            out[a, b] = ltw_pair(queries[a], candidates[b], ks)
    return out


@njit(cache=True)
def ltw_pairs(xs, ys, ks):
    out = np.empty(xs.shape[0])
    for a in range(xs.shape[0]):
        out[a] = ltw_pair(xs[a], ys[a], ks)
    return out


@njit(cache=True)
def _envelope(y, w):
    n = y.shape[0]
    upper = np.empty(n)
    lower = np.empty(n)
    for i in range(n):
        lo = i - w
        if lo < 0:
            lo = 0
        hi = i + w
        if hi > n - 1:
            hi = n - 1
        u = y[lo]
        l = y[lo]
        for j in range(lo + 1, hi + 1):
            if y[j] > u:
                u = y[j]
            if y[j] < l:
                l = y[j]
        upper[i] = u
        lower[i] = l
    return upper, lower


@njit(cache=True)
def _lbk_against_envelope(x, upper, lower, cost_code):
    s = 0.0
    for i in range(x.shape[0]):
        if x[i] > upper[i]:
            s += _point_cost(x[i], upper[i], cost_code)
        elif x[i] < lower[i]:
            s += _point_cost(x[i], lower[i], cost_code)
    return s


@njit(cache=True)
def lb_keogh_pair(x, y, w, cost_code):
    upper, lower = _envelope(y, w)
    return _lbk_against_envelope(x, upper, lower, cost_code)


@njit(cache=True)
def lb_keogh_many(queries, candidates, w, cost_code):
    t, n = candidates.shape
    uppers = np.empty((t, n))
    lowers = np.empty((t, n))
    for b in range(t):
        u, l = _envelope(candidates[b], w)
        uppers[b] = u
        lowers[b] = l
    out = np.empty((queries.shape[0], t))
    for a in range(queries.shape[0]):
        for b in range(t):
            out[a, b] = _lbk_against_envelope(queries[a], uppers[b], lowers[b], cost_code)
    return out


@njit(cache=True)
def lb_keogh_pairs(xs, ys, w, cost_code):
    out = np.empty(xs.shape[0])
    for a in range(xs.shape[0]):
        out[a] = lb_keogh_pair(xs[a], ys[a], w, cost_code)
    return out


@njit(cache=True)
def _msm_op_cost(p, q, r, c):
    lo = q
    hi = r
    if lo > hi:
        lo = r
        hi = q
    if lo <= p <= hi:
        return c
    a = abs(p - q)
    b = abs(p - r)
    if b < a:
        a = b
    return c + a


@njit(cache=True)
def msm_pair(x, y, c):
    n = x.shape[0]
    m = y.shape[0]
    prev = np.empty(m)
    cur = np.empty(m)
    prev[0] = abs(x[0] - y[0])
    for j in range(1, m):
        prev[j] = prev[j - 1] + _msm_op_cost(y[j], x[0], y[j - 1], c)
    for i in range(1, n):
        cur[0] = prev[0] + _msm_op_cost(x[i], x[i - 1], y[0], c)
        for j in range(1, m):
            move = prev[j - 1] + abs(x[i] - y[j])
            split = prev[j] + _msm_op_cost(x[i], x[i - 1], y[j], c)
            merge = cur[j - 1] + _msm_op_cost(y[j], x[i], y[j - 1], c)
            best = move
            if split < best:
                best = split
            if merge < best:
                best = merge
            cur[j] = best
        tmp = prev
        prev = cur
        cur = tmp
    return prev[m - 1]


@njit(cache=True)
def msm_many(queries, candidates, c):
    out = np.empty((queries.shape[0], candidates.shape[0]))
    for a in range(queries.shape[0]):
        for b in range(candidates.shape[0]):
            out[a, b] = msm_pair(queries[a], candidates[b], c)
    return out


@njit(cache=True)
def msm_pairs(xs, ys, c):
    out = np.empty(xs.shape[0])
    for a in range(xs.shape[0]):
        out[a] = msm_pair(xs[a], ys[a], c)
    return out


@njit(cache=True)
def euclidean_pair(x, y):
    s = 0.0
    for i in range(x.shape[0]):
        d = x[i] - y[i]
        s += d * d
    return np.sqrt(s)


@njit(cache=True)
def euclidean_many(queries, candidates):
    out = np.empty((queries.shape[0], candidates.shape[0]))
    for a in range(queries.shape[0]):
        for b in range(candidates.shape[0]):
            out[a, b] = euclidean_pair(queries[a], candidates[b])
    return out


@njit(cache=True)
def euclidean_pairs(xs, ys):
    out = np.empty(xs.shape[0])
    for a in range(xs.shape[0]):
        out[a] = euclidean_pair(xs[a], ys[a])
    return out
