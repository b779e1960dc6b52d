"""Independent reference implementations the module tests check against.

Everything here deliberately avoids the library's computation paths: plain
loops and two-pass statistics, so a library bug cannot hide in a shared code
path.
"""

import math

import numpy as np

#: mirror of the library's sigma==0 degeneracy rule so validity patterns match
VAR_TINY = 1e-12


def zncc_surface_bruteforce(e, we, c, wc, min_overlap_fraction):
    """Double loop over all offsets with two-pass statistics.

    Returns (values, valid, counts) grids in the same layout as
    ``smallprint.zncc.correlation_surface``.
    """
    me, ne = e.shape
    mc, nc = c.shape
    min_count = min_overlap_fraction * min(e.size, c.size)
    values = np.full((me + mc - 1, ne + nc - 1), np.nan)
    valid = np.zeros(values.shape, dtype=bool)
    counts = np.zeros(values.shape, dtype=np.int64)
    for v in range(-(mc - 1), me):
        for u in range(-(nc - 1), ne):
            y0, y1 = max(0, v), min(me - 1, mc - 1 + v)
            x0, x1 = max(0, u), min(ne - 1, nc - 1 + u)
            ev = e[y0:y1 + 1, x0:x1 + 1]
            cv = c[y0 - v:y1 - v + 1, x0 - u:x1 - u + 1]
            sup = we[y0:y1 + 1, x0:x1 + 1] & wc[y0 - v:y1 - v + 1,
                                                x0 - u:x1 - u + 1]
            n = int(sup.sum())
            iv, iu = v + mc - 1, u + nc - 1
            counts[iv, iu] = n
            if n == 0 or n < min_count:
                continue
            es, cs = ev[sup], cv[sup]
            mu_e, mu_c = es.mean(), cs.mean()
            var_e = float(((es - mu_e) ** 2).sum())
            var_c = float(((cs - mu_c) ** 2).sum())
            if var_e <= VAR_TINY or var_c <= VAR_TINY:
                continue
            valid[iv, iu] = True
            values[iv, iu] = float(((es - mu_e) * (cs - mu_c)).sum()) \
                / math.sqrt(var_e * var_c)
    return values, valid, counts


def dense_convolve2d_replicate(arr, kernel):
    """Direct dense 2-D convolution with edge-replicated borders."""
    h, w = arr.shape
    kh, kw = kernel.shape
    ry, rx = kh // 2, kw // 2
    out = np.zeros_like(arr, dtype=np.float64)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for j in range(kh):
                for i in range(kw):
                    yy = min(max(y + j - ry, 0), h - 1)
                    xx = min(max(x + i - rx, 0), w - 1)
                    acc += arr[yy, xx] * kernel[j, i]
            out[y, x] = acc
    return out


def finite_differences(arr):
    """Central differences inside, one-sided at the borders; returns (gx, gy)."""
    h, w = arr.shape
    gx = np.zeros_like(arr, dtype=np.float64)
    gy = np.zeros_like(arr, dtype=np.float64)
    for y in range(h):
        for x in range(w):
            if 0 < x < w - 1:
                gx[y, x] = (arr[y, x + 1] - arr[y, x - 1]) / 2.0
            elif x == 0:
                gx[y, x] = arr[y, 1] - arr[y, 0]
            else:
                gx[y, x] = arr[y, w - 1] - arr[y, w - 2]
            if 0 < y < h - 1:
                gy[y, x] = (arr[y + 1, x] - arr[y - 1, x]) / 2.0
            elif y == 0:
                gy[y, x] = arr[1, x] - arr[0, x]
            else:
                gy[y, x] = arr[h - 1, x] - arr[h - 2, x]
    return gx, gy


def bilinear_closed_form(arr, x, y):
    """Textbook four-pixel blend."""
    h, w = arr.shape
    x0 = min(int(math.floor(x)), w - 2) if w > 1 else 0
    y0 = min(int(math.floor(y)), h - 2) if h > 1 else 0
    fx, fy = x - x0, y - y0
    return ((1 - fy) * ((1 - fx) * arr[y0, x0] + fx * arr[y0, x0 + 1])
            + fy * ((1 - fx) * arr[y0 + 1, x0] + fx * arr[y0 + 1, x0 + 1]))


def symmetric_matches_bruteforce(dmat):
    """Hand enumeration of mutual argmins with lowest-index tie-breaks."""
    n, m = dmat.shape
    pairs = []
    for i in range(n):
        best_k, best_d = None, None
        for k in range(m):
            if best_d is None or dmat[i, k] < best_d:
                best_k, best_d = k, dmat[i, k]
        best_i, best_di = None, None
        for i2 in range(n):
            if best_di is None or dmat[i2, best_k] < best_di:
                best_i, best_di = i2, dmat[i2, best_k]
        if best_i == i:
            pairs.append((i, best_k, float(dmat[i, best_k])))
    pairs.sort(key=lambda p: (p[2], p[0], p[1]))
    return pairs
