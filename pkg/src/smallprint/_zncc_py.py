"""Correlation-surface sum tables via direct summation (numpy backend).

This is the portable fallback for the compiled kernel in ``_zncc_cy``. Both
backends produce the six per-offset sums needed by the surface; the policy
layer in :mod:`smallprint.zncc` turns them into correlation values.

For each row offset v the sums over all column offsets u are diagonal sums of
small matrix products between the overlapping row blocks, so the whole surface
reduces to BLAS calls plus ``bincount`` reductions. Everything is an exact sum
over the support; no FFT or other approximate acceleration is involved.
"""

import numpy as np


def surface_sums(e: np.ndarray, we: np.ndarray,
                 c: np.ndarray, wc: np.ndarray) -> tuple[np.ndarray, ...]:
    """Six full-range sum tables for the masked correlation surface.

    Inputs are the two intensity grids and their {0,1} validity weights.
    Output grids have shape ``(me + mc - 1, ne + nc - 1)``; the entry at
    ``[v + mc - 1, u + nc - 1]`` holds the sum over the support of offset
    ``(u, v)``, i.e. over pixels (x, y) of ``e`` whose counterpart
    ``(x - u, y - v)`` lands on a valid pixel of ``c``.

    Returns ``(cnt, se, sc, see, scc, sec)``.
    """
    me, ne = e.shape
    mc, nc = c.shape
    mv, nu = me + mc - 1, ne + nc - 1

    ew = e * we
    eew = ew * e
    cw = c * wc
    ccw = cw * c
    left = (we, ew, eew)
    right = (wc, cw, ccw)
    # (left, right) factor pairs yielding cnt, se, sc, see, scc, sec
    combos = ((0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1))

    # flat index of the diagonal u = x - xc in the (x, xc) product matrix
    didx = (np.arange(ne)[:, None] - np.arange(nc)[None, :] + nc - 1).ravel()

    out = [np.zeros((mv, nu)) for _ in range(6)]
    for iv in range(mv):
        v = iv - (mc - 1)
        y0, y1 = max(0, v), min(me - 1, mc - 1 + v)
        rows_e = slice(y0, y1 + 1)
        rows_c = slice(y0 - v, y1 - v + 1)
        for k, (a, b) in enumerate(combos):
            prod = left[a][rows_e].T @ right[b][rows_c]
            out[k][iv] = np.bincount(didx, weights=prod.ravel(), minlength=nu)
    return tuple(out)
