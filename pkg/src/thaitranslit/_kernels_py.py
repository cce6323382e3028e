"""Pure-Python/NumPy fallbacks for the compiled kernels in ``_kernels.pyx``.

Arithmetic is ordered exactly as in the compiled version so both backends
return bit-identical results.
"""

import numpy as np


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def weighted_edit_distance(a, b, subcost, indel=1.0):
    n, m = len(a), len(b)
    d = np.empty((n + 1, m + 1))
    d[:, 0] = np.arange(n + 1) * indel
    d[0, :] = np.arange(m + 1) * indel
    for i in range(1, n + 1):
        row = subcost[a[i - 1]]
        for j in range(1, m + 1):
            best = d[i - 1, j] + indel
            if d[i, j - 1] + indel < best:
                best = d[i, j - 1] + indel
            sub = d[i - 1, j - 1] + row[b[j - 1]]
            if sub < best:
                best = sub
            d[i, j] = best
    return float(d[n, m])


def best_split(X, y, w, idx, features, min_leaf):
    n = len(idx)
    wn = w[idx]
    pn = wn * y[idx]
    tot_w = np.cumsum(wn)[-1]
    tot_p = np.cumsum(pn)[-1]
    best_f, best_thr, best_score = -1, 0.0, np.inf
    k = np.arange(1, n)
    for f in features:
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        v = vals[order]
        wl = np.cumsum(wn[order])[:-1]
        pl = np.cumsum(pn[order])[:-1]
        wr = tot_w - wl
        pr = tot_p - pl
        ok = (v[:-1] != v[1:]) & (k >= min_leaf) & (n - k >= min_leaf) & (wl > 0) & (wr > 0)
        if not ok.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            nl = wl - pl
            nr = wr - pr
            score = (wl - (pl * pl + nl * nl) / wl) + (wr - (pr * pr + nr * nr) / wr)
        score = np.where(ok, score, np.inf)
        j = int(np.argmin(score))
        if score[j] < best_score:
            best_f = int(f)
            best_score = float(score[j])
            best_thr = float((v[j] + v[j + 1]) / 2.0)
    return best_f, best_thr, best_score
