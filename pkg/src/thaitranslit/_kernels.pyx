# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: edit distances and the CART split search."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


def levenshtein(str a, str b):
    cdef Py_ssize_t n = len(a), m = len(b)
    cdef Py_ssize_t i, j
    cdef Py_UCS4 ca
    cdef long cost, best, *prev, *cur, *tmp
    if n == 0:
        return m
    if m == 0:
        return n
    if m > n:
        a, b = b, a
        n, m = m, n
    prev = <long *> malloc((m + 1) * sizeof(long))
    cur = <long *> malloc((m + 1) * sizeof(long))
    try:
        for j in range(m + 1):
            prev[j] = j
        for i in range(1, n + 1):
            cur[0] = i
            ca = a[i - 1]
            for j in range(1, m + 1):
                cost = prev[j - 1] + (0 if ca == <Py_UCS4> b[j - 1] else 1)
                best = prev[j] + 1
                if cur[j - 1] + 1 < best:
                    best = cur[j - 1] + 1
                if cost < best:
                    best = cost
                cur[j] = best
            tmp = prev
            prev = cur
            cur = tmp
        return prev[m]
    finally:
        free(prev)
        free(cur)


def weighted_edit_distance(const long[:] a, const long[:] b, const double[:, :] subcost,
                           double indel=1.0):
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0]
    cdef Py_ssize_t i, j
    cdef double sub, best
    cdef double[:, :] d = np.empty((n + 1, m + 1), dtype=np.float64)
    for i in range(n + 1):
        d[i, 0] = i * indel
    for j in range(m + 1):
        d[0, j] = j * indel
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = d[i - 1, j - 1] + subcost[a[i - 1], b[j - 1]]
            best = d[i - 1, j] + indel
            if d[i, j - 1] + indel < best:
                best = d[i, j - 1] + indel
            if sub < best:
                best = sub
            d[i, j] = best
    return d[n, m]


def best_split(const double[:, :] X, const double[:] y, const double[:] w,
               const long[:] idx, const long[:] features, Py_ssize_t min_leaf):
    """Return ``(feature, threshold, score)`` minimising weighted child Gini.

    ``score`` is ``w_l*gini_l + w_r*gini_r``. Returns feature -1 when no split
    leaves ``min_leaf`` samples on both sides.
    """
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t fi, f, k, s
    cdef double tot_w = 0.0, tot_p = 0.0
    cdef double wl, pl, wr, pr, nl, nr, score, thr
    cdef double best_score = np.inf, best_thr = 0.0
    cdef long best_f = -1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vals = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order
    cdef double[:] v = vals

    for k in range(n):
        s = idx[k]
        tot_w += w[s]
        tot_p += w[s] * y[s]

    for fi in range(features.shape[0]):
        f = features[fi]
        for k in range(n):
            v[k] = X[idx[k], f]
        order = np.argsort(vals, kind="stable").astype(np.int64)
        wl = 0.0
        pl = 0.0
        for k in range(n - 1):
            s = idx[order[k]]
            wl += w[s]
            pl += w[s] * y[s]
            if v[order[k]] == v[order[k + 1]]:
                continue
            if k + 1 < min_leaf or n - k - 1 < min_leaf:
                continue
            wr = tot_w - wl
            pr = tot_p - pl
            if wl <= 0.0 or wr <= 0.0:
                continue
            nl = wl - pl
            nr = wr - pr
            score = (wl - (pl * pl + nl * nl) / wl) + (wr - (pr * pr + nr * nr) / wr)
            thr = (v[order[k]] + v[order[k + 1]]) / 2.0
            if score < best_score:
                best_score = score
                best_f = f
                best_thr = thr
    return best_f, best_thr, best_score
