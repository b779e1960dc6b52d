# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: initializedcheck=False
"""Fused inner loops for the masked correlation-surface sums.

Same contract as ``smallprint._zncc_py.surface_sums`` but a single fused pass
per offset. Two inner paths:

* interval path: the reference carries no mask and every candidate row's valid
  pixels form one contiguous run (always true for rotation masks), so the
  support per row is a clipped interval and no weights are loaded;
* general path: arbitrary {0,1} weights on both sides.

Offsets whose overlap rectangle cannot reach ``min_count`` valid pixels only
get their pixel count computed; they are marked invalid downstream regardless
of the sums.
"""

import numpy as np


def surface_sums(const double[:, ::1] e, const double[:, ::1] we,
                 const double[:, ::1] c, const double[:, ::1] wc,
                 double min_count, bint e_unmasked,
                 const long long[::1] c_xlo, const long long[::1] c_xhi):
    """Six full-range sum tables, laid out as in the python backend.

    ``c_xlo``/``c_xhi`` give the inclusive valid column run per candidate row
    (``xhi < xlo`` for an empty row); pass empty arrays when the candidate
    mask is not run-representable.
    """
    cdef Py_ssize_t me = e.shape[0], ne = e.shape[1]
    cdef Py_ssize_t mc = c.shape[0], nc = c.shape[1]
    cdef Py_ssize_t mv = me + mc - 1, nu = ne + nc - 1
    cdef bint intervals = e_unmasked and c_xlo.shape[0] == mc

    cnt_a = np.zeros((mv, nu))
    se_a = np.zeros((mv, nu))
    sc_a = np.zeros((mv, nu))
    see_a = np.zeros((mv, nu))
    scc_a = np.zeros((mv, nu))
    sec_a = np.zeros((mv, nu))
    cdef double[:, ::1] cnt = cnt_a, se = se_a, sc = sc_a
    cdef double[:, ::1] see = see_a, scc = scc_a, sec = sec_a

    # per-pixel products reused across all offsets (general path)
    ew_a = np.multiply(e, we)
    eew_a = np.multiply(ew_a, e)
    cw_a = np.multiply(c, wc)
    ccw_a = np.multiply(cw_a, c)
    cdef const double[:, ::1] ew = ew_a, eew = eew_a, cw = cw_a, ccw = ccw_a

    cdef Py_ssize_t iu, iv, u, v, y, x, y0, y1, x0, x1, yc, xoff, lo, hi
    cdef double a_cnt, a_se, a_sc, a_see, a_scc, a_sec
    cdef double ex, cx, rect
    cdef const double *pe
    cdef const double *pwe
    cdef const double *pew
    cdef const double *peew
    cdef const double *pc
    cdef const double *pwc
    cdef const double *pcw
    cdef const double *pccw

    with nogil:
        for iv in range(mv):
            v = iv - (mc - 1)
            # overlap rows: y in e, y - v in c
            y0 = v if v > 0 else 0
            y1 = me - 1 if me - 1 < mc - 1 + v else mc - 1 + v
            for iu in range(nu):
                u = iu - (nc - 1)
                x0 = u if u > 0 else 0
                x1 = ne - 1 if ne - 1 < nc - 1 + u else nc - 1 + u
                rect = <double> ((y1 - y0 + 1) * (x1 - x0 + 1))

                if intervals:
                    a_cnt = 0.0
                    if rect < min_count:
                        # cannot be valid: record the exact count only
                        for y in range(y0, y1 + 1):
                            yc = y - v
                            lo = c_xlo[yc] + u
                            hi = c_xhi[yc] + u
                            if lo < x0:
                                lo = x0
                            if hi > x1:
                                hi = x1
                            if hi >= lo:
                                a_cnt += <double> (hi - lo + 1)
                        cnt[iv, iu] = a_cnt
                        continue
                    a_se = 0.0
                    a_sc = 0.0
                    a_see = 0.0
                    a_scc = 0.0
                    a_sec = 0.0
                    for y in range(y0, y1 + 1):
                        yc = y - v
                        lo = c_xlo[yc] + u
                        hi = c_xhi[yc] + u
                        if lo < x0:
                            lo = x0
                        if hi > x1:
                            hi = x1
                        if hi < lo:
                            continue
                        a_cnt += <double> (hi - lo + 1)
                        pe = &e[y, 0]
                        pc = &c[yc, 0]
                        xoff = -u
                        for x in range(lo, hi + 1):
                            ex = pe[x]
                            cx = pc[x + xoff]
                            a_se += ex
                            a_sc += cx
                            a_see += ex * ex
                            a_scc += cx * cx
                            a_sec += ex * cx
                else:
                    if rect < min_count:
                        a_cnt = 0.0
                        for y in range(y0, y1 + 1):
                            pwe = &we[y, 0]
                            pwc = &wc[y - v, 0]
                            xoff = -u
                            for x in range(x0, x1 + 1):
                                a_cnt += pwe[x] * pwc[x + xoff]
                        cnt[iv, iu] = a_cnt
                        continue
                    a_cnt = 0.0
                    a_se = 0.0
                    a_sc = 0.0
                    a_see = 0.0
                    a_scc = 0.0
                    a_sec = 0.0
                    for y in range(y0, y1 + 1):
                        yc = y - v
                        pwe = &we[y, 0]
                        pew = &ew[y, 0]
                        peew = &eew[y, 0]
                        pwc = &wc[yc, 0]
                        pcw = &cw[yc, 0]
                        pccw = &ccw[yc, 0]
                        xoff = -u
                        for x in range(x0, x1 + 1):
                            a_cnt += pwe[x] * pwc[x + xoff]
                            a_se += pew[x] * pwc[x + xoff]
                            a_sc += pwe[x] * pcw[x + xoff]
                            a_see += peew[x] * pwc[x + xoff]
                            a_scc += pwe[x] * pccw[x + xoff]
                            a_sec += pew[x] * pcw[x + xoff]
                cnt[iv, iu] = a_cnt
                se[iv, iu] = a_se
                sc[iv, iu] = a_sc
                see[iv, iu] = a_see
                scc[iv, iu] = a_scc
                sec[iv, iu] = a_sec

    return cnt_a, se_a, sc_a, see_a, scc_a, sec_a
