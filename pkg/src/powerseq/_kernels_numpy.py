"""Pure numpy fallback for the distance kernels.

Same signatures and values as ``_kernels_numba``.  The banded DP kernels
replace the inner column loop with a vectorized min-plus scan: for a row
recurrence D[j] = min(A[j], D[j-1] + g[j]) the closed form is

    D[j] = CS[j] + running_min(A - CS)[j],   CS = cumsum(g),

because a carry entered at l accumulates exactly the step costs l+1..j.
This keeps the Python loop linear in the series length.  LTW's scalar path
accumulates left to right so it matches the numba build bit for bit.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

COST_SQUARED = 0
COST_ABS = 1


def _point_cost_vec(a, b, cost_code):
    d = a - b
    if cost_code == COST_ABS:
        return np.abs(d)
    return d * d


def _minplus_scan(head, a_tail, g_tail):
    """Solve D[0]=head, D[j]=min(A[j], D[j-1]+g[j]) for j>=1, vectorized."""
    cs = np.concatenate(([0.0], np.cumsum(g_tail)))
    cand = np.concatenate(([head], a_tail - cs[1:]))
    return cs + np.minimum.accumulate(cand)


def dtw_pair(x, y, w, cost_code):
    n = x.shape[0]
    m = y.shape[0]
    prev = np.full(m + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        lo = max(1, i - w)
        hi = min(m, i + w)
        cur = np.full(m + 1, np.inf)
        if lo <= hi:
            c = _point_cost_vec(x[i - 1], y[lo - 1 : hi], cost_code)
            step = np.minimum(prev[lo - 1 : hi], prev[lo : hi + 1])
            a = step + c
            if hi > lo:
                cur[lo : hi + 1] = _minplus_scan(a[0], a[1:], c[1:])
            else:
                cur[lo] = a[0]
        prev = cur
    return prev[m]


def dtw_many(queries, candidates, w, cost_code):
    out = np.empty((queries.shape[0], candidates.shape[0]))
    for a in range(queries.shape[0]):
        for b in range(candidates.shape[0]):
            out[a, b] = dtw_pair(queries[a], candidates[b], w, cost_code)
    return out


def dtw_pairs(xs, ys, w, cost_code):
    return np.array([dtw_pair(xs[a], ys[a], w, cost_code) for a in range(xs.shape[0])])


def _ltw_min3(x, y, k):
    n = x.shape[0]
    seg = x[k : n - k]
    m3 = np.abs(seg - y[k : n - k])
    np.minimum(m3, np.abs(seg - y[k + 1 : n - k + 1]), out=m3)
    np.minimum(m3, np.abs(seg - y[2 * k : n]), out=m3)
    return m3


def ltw_pair(x, y, ks):
    total = 0.0
    for k in ks:
        s = 0.0
        for v in _ltw_min3(x, y, int(k)).tolist():
            s += v
        total += s
    return total


def ltw_many(queries, candidates, ks):
    q, n = queries.shape
    out = np.zeros((q, candidates.shape[0]))
    for a in range(q):
        x = queries[a]
        for k in ks:
            k = int(k)
            seg = x[k : n - k]
            m3 = np.abs(seg - candidates[:, k : n - k])
            np.minimum(m3, np.abs(seg - candidates[:, k + 1 : n - k + 1]), out=m3)
            np.minimum(m3, np.abs(seg - candidates[:, 2 * k : n]), out=m3)
            out[a] += m3.sum(axis=1)
    return out


def ltw_pairs(xs, ys, ks):
    n = xs.shape[1]
    out = np.zeros(xs.shape[0])
    for k in ks:
        k = int(k)
        seg = xs[:, k : n - k]
        m3 = np.abs(seg - ys[:, k : n - k])
        np.minimum(m3, np.abs(seg - ys[:, k + 1 : n - k + 1]), out=m3)
        np.minimum(m3, np.abs(seg - ys[:, 2 * k : n]), out=m3)
        out += m3.sum(axis=1)
    return out


def _envelopes(rows, w):
    if w == 0:
        return rows.copy(), rows.copy()
    padded = np.pad(rows, ((0, 0), (w, w)), constant_values=-np.inf)
    upper = sliding_window_view(padded, 2 * w + 1, axis=1).max(axis=2)
    padded = np.pad(rows, ((0, 0), (w, w)), constant_values=np.inf)
    lower = sliding_window_view(padded, 2 * w + 1, axis=1).min(axis=2)
    return upper, lower


def _lbk_against_envelope(x, upper, lower, cost_code):
    above = x > upper
    below = x < lower
    s = 0.0
    if np.any(above):
        s += float(np.sum(_point_cost_vec(x[above], upper[above], cost_code)))
    if np.any(below):
        s += float(np.sum(_point_cost_vec(x[below], lower[below], cost_code)))
    return s


def lb_keogh_pair(x, y, w, cost_code):
    upper, lower = _envelopes(y[None, :], w)
    return _lbk_against_envelope(x, upper[0], lower[0], cost_code)


def lb_keogh_many(queries, candidates, w, cost_code):
    uppers, lowers = _envelopes(candidates, w)
    out = np.empty((queries.shape[0], candidates.shape[0]))
    for a in range(queries.shape[0]):
        x = queries[a]
        above = np.maximum(x - uppers, 0.0)
        below = np.maximum(lowers - x, 0.0)
        gap = above + below
        if cost_code == COST_ABS:
            out[a] = gap.sum(axis=1)
        else:
            out[a] = (gap * gap).sum(axis=1)
    return out


def lb_keogh_pairs(xs, ys, w, cost_code):
    return np.array(
        [lb_keogh_pair(xs[a], ys[a], w, cost_code) for a in range(xs.shape[0])]
    )


def _msm_op_cost_vec(p, q, r, c):
    lo = np.minimum(q, r)
    hi = np.maximum(q, r)
    inside = (lo <= p) & (p <= hi)
    return np.where(inside, c, c + np.minimum(np.abs(p - q), np.abs(p - r)))


def msm_pair(x, y, c):
    n = x.shape[0]
    m = y.shape[0]
    prev = np.empty(m)
    prev[0] = abs(x[0] - y[0])
    if m > 1:
        prev[1:] = prev[0] + np.cumsum(_msm_op_cost_vec(y[1:], x[0], y[:-1], c))
    for i in range(1, n):
        head = prev[0] + _msm_op_cost_vec(x[i], x[i - 1], y[0], c)
        if m == 1:
            prev = np.array([head])
            continue
        move = prev[:-1] + np.abs(x[i] - y[1:])
        spl = prev[1:] + _msm_op_cost_vec(x[i], x[i - 1], y[1:], c)
        a = np.minimum(move, spl)
        g = _msm_op_cost_vec(y[1:], x[i], y[:-1], c)
        prev = _minplus_scan(float(head), a, g)
    return prev[m - 1]


def msm_many(queries, candidates, c):
    out = np.empty((queries.shape[0], candidates.shape[0]))
    for a in range(queries.shape[0]):
        for b in range(candidates.shape[0]):
            out[a, b] = msm_pair(queries[a], candidates[b], c)
    return out


def msm_pairs(xs, ys, c):
    return np.array([msm_pair(xs[a], ys[a], c) for a in range(xs.shape[0])])


def euclidean_pair(x, y):
    d = x - y
    return float(np.sqrt(np.sum(d * d)))


def euclidean_many(queries, candidates):
    diff = queries[:, None, :] - candidates[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def euclidean_pairs(xs, ys):
    d = xs - ys
    return np.sqrt(np.sum(d * d, axis=1))
