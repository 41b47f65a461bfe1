"""One-dimensional distance-transform passes (numba kernels).

Each kernel transforms every row of a 2-d float array independently; the
n-d transforms in :mod:`zonediag.raster` apply them axis by axis.
``inf`` marks "no source".
"""
import numpy as np
from numba import njit

INF = np.inf


@njit(cache=True)
def l1_rows(f, w):
    """g(x) = min_y f(y) + w|x - y|.

    min over y <= x of f(y) + w(x - y) has an x-independent argmin, so each
    sweep only tracks its best source; values are formed as f(y) + w*|x - y|.
    """
    L, n = f.shape
    out = np.empty_like(f)
    for l in range(L):
        src = -1
        for i in range(n):
            if src < 0 or f[l, i] <= f[l, src] + w * (i - src):
                if f[l, i] < INF:
                    src = i
            out[l, i] = f[l, src] + w * (i - src) if src >= 0 else INF
        src = -1
        for i in range(n - 1, -1, -1):
            if src < 0 or f[l, i] <= f[l, src] + w * (src - i):
                if f[l, i] < INF:
                    src = i
            if src >= 0:
                c = f[l, src] + w * (src - i)
                if c < out[l, i]:
                    out[l, i] = c
    return out


@njit(cache=True)
def nearest_rows(f, w):
    """w * |x - y| for the nearest y with f(y) finite; for 0/inf input."""
    L, n = f.shape
    out = np.empty_like(f)
    for l in range(L):
        last = -1
        for i in range(n):
            if f[l, i] < INF:
                last = i
            out[l, i] = w * (i - last) if last >= 0 else INF
        last = -1
        for i in range(n - 1, -1, -1):
            if f[l, i] < INF:
                last = i
            if last >= 0:
                c = w * (last - i)
                if c < out[l, i]:
                    out[l, i] = c
    return out


@njit(cache=True)
def linf_rows(f, w):
    """g(x) = min_y max(f(y), w|x - y|), scanning outwards until w*r >= best."""
    L, n = f.shape
    out = np.empty_like(f)
    for l in range(L):
        for x in range(n):
            best = f[l, x]
            r = 1
            while r < n and w * r < best:
                wr = w * r
                if x - r >= 0:
                    c = f[l, x - r]
                    if c < wr:
                        c = wr
                    if c < best:
                        best = c
                if x + r < n:
                    c = f[l, x + r]
                    if c < wr:
                        c = wr
                    if c < best:
                        best = c
                r += 1
            out[l, x] = best
    return out


@njit(cache=True)
def l2sq_rows(f, w):
    """g(x) = min_y f(y) + (w(x - y))^2 by the lower envelope of parabolas."""
    L, n = f.shape
    out = np.empty_like(f)
    v = np.empty(n, dtype=np.int64)
    z = np.empty(n + 1)
    w2 = w * w
    for l in range(L):
        k = -1
        for q in range(n):
            fq = f[l, q]
            if fq == INF:
                continue
            if k < 0:
                k = 0
                v[0] = q
                z[0] = -INF
                z[1] = INF
                continue
            s = 0.0
            while k >= 0:
                p = v[k]
                s = ((fq + w2 * q * q) - (f[l, p] + w2 * p * p)) / (2.0 * w2 * (q - p))
                if s <= z[k]:
                    k -= 1
                else:
                    break
            k += 1
            v[k] = q
            z[k] = s if k > 0 else -INF
            z[k + 1] = INF
        if k < 0:
            for q in range(n):
                out[l, q] = INF
            continue
        j = 0
        for q in range(n):
            while z[j + 1] < q:
                j += 1
            p = v[j]
            d = w * (q - p)
            out[l, q] = f[l, p] + d * d
    return out
