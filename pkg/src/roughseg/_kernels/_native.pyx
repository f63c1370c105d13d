# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled compute kernels.

Twin of ``roughseg._kernels._pure``: identical operations in identical
floating-point order (the extension is built with -ffp-contract=off), so
both backends return bit-identical results. Any change here must be
mirrored in the pure backend and covered by the parity tests.
"""

from libc.math cimport acos, atan2, cos, fabs, sin, sqrt
from libc.stdint cimport int32_t, int64_t, uint8_t

import numpy as np

BACKEND = "native"

cdef double DEG2RAD = 3.141592653589793 / 180.0
cdef double RAD2DEG = 180.0 / 3.141592653589793


cdef inline double _dist(double h1, double s1, double i1,
                         double h2, double s2, double i2) nogil:
    cdef double dh = fabs(h1 - h2)
    if dh > 180.0:
        dh = 360.0 - dh
    return dh / 360.0 + fabs(s1 - s2) + fabs(i1 - i2)


cdef inline void _hsi(int ri, int gi, int bi, double *out) nogil:
    cdef double r = ri / 255.0
    cdef double g = gi / 255.0
    cdef double b = bi / 255.0
    cdef double total = r + g + b
    cdef double i = total / 3.0
    cdef double mn, s, num, den, x, h
    if ri == gi and gi == bi:
        out[0] = 0.0
        out[1] = 0.0
        out[2] = i
        return
    mn = r
    if g < mn:
        mn = g
    if b < mn:
        mn = b
    s = 1.0 - 3.0 * mn / total
    num = 0.5 * ((r - g) + (r - b))
    den = sqrt((r - g) * (r - g) + (r - b) * (g - b))
    x = num / den
    if x > 1.0:
        x = 1.0
    elif x < -1.0:
        x = -1.0
    h = acos(x) * RAD2DEG
    if bi > gi:
        h = 360.0 - h
    out[0] = h
    out[1] = s
    out[2] = i


def rgb_to_hsi_pixel(int r, int g, int b):
    cdef double out[3]
    _hsi(r, g, b, out)
    return out[0], out[1], out[2]


def rgb_to_hsi_planes(rgb):
    cdef const uint8_t[:, ::1] px = np.ascontiguousarray(rgb, dtype=np.uint8)
    cdef Py_ssize_t n = px.shape[0]
    h_arr = np.empty(n, dtype=np.float64)
    s_arr = np.empty(n, dtype=np.float64)
    i_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] h = h_arr
    cdef double[::1] s = s_arr
    cdef double[::1] i = i_arr
    cdef double out[3]
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            _hsi(px[k, 0], px[k, 1], px[k, 2], out)
            h[k] = out[0]
            s[k] = out[1]
            i[k] = out[2]
    return h_arr, s_arr, i_arr


def hsi_distance(double h1, double s1, double i1, double h2, double s2, double i2):
    return _dist(h1, s1, i1, h2, s2, i2)


def population_counts(h, s, i, cell_pixels, cell_starts, active_cells,
                      double seed_h, double seed_s, double seed_i, double theta):
    cdef const double[::1] hv = h
    cdef const double[::1] sv = s
    cdef const double[::1] iv = i
    cdef const int32_t[::1] px = cell_pixels
    cdef const int32_t[::1] starts = cell_starts
    cdef const int32_t[::1] active = active_cells
    out_arr = np.zeros(len(active_cells), dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef Py_ssize_t j, t, p
    cdef int32_t cell
    cdef int64_t cnt
    with nogil:
        for j in range(active.shape[0]):
            cell = active[j]
            cnt = 0
            for t in range(starts[cell], starts[cell + 1]):
                p = px[t]
                if _dist(hv[p], sv[p], iv[p], seed_h, seed_s, seed_i) <= theta:
                    cnt += 1
            out[j] = cnt
    return out_arr


def max_hue_index(h, assignment):
    cdef const double[::1] hv = h
    cdef const int32_t[::1] av = assignment
    cdef Py_ssize_t k, best = -1
    cdef double best_h = 0.0
    with nogil:
        for k in range(hv.shape[0]):
            if av[k] < 0 and (best < 0 or hv[k] > best_h):
                best = k
                best_h = hv[k]
    return int(best)


def cluster_sq_dev(h, s, i, members):
    cdef const double[::1] hv = h
    cdef const double[::1] sv = s
    cdef const double[::1] iv = i
    cdef const int32_t[::1] m = members
    cdef Py_ssize_t n = m.shape[0]
    if n == 0:
        return 0.0
    cdef double sx = 0.0, sy = 0.0, ssum = 0.0, isum = 0.0
    cdef double hr, mh, ms, mi, dev, dh, ds, di
    cdef double hval, sval, ival
    cdef double hmin, hmax, smin, smax, imin, imax
    cdef Py_ssize_t k, idx
    with nogil:
        idx = m[0]
        hmin = hmax = hv[idx]
        smin = smax = sv[idx]
        imin = imax = iv[idx]
        for k in range(n):
            idx = m[k]
            hval = hv[idx]
            sval = sv[idx]
            ival = iv[idx]
            hr = hval * DEG2RAD
            sx += cos(hr)
            sy += sin(hr)
            ssum += sval
            isum += ival
            if hval < hmin:
                hmin = hval
            elif hval > hmax:
                hmax = hval
            if sval < smin:
                smin = sval
            elif sval > smax:
                smax = sval
            if ival < imin:
                imin = ival
            elif ival > imax:
                imax = ival
        # a uniform component's mean is that exact value, so fully
        # homogeneous clusters score exactly zero (the sentinel case)
        if hmin == hmax:
            mh = hmin
        else:
            mh = atan2(sy, sx) * RAD2DEG
            if mh < 0.0:
                mh += 360.0
        ms = smin if smin == smax else ssum / n
        mi = imin if imin == imax else isum / n
        dev = 0.0
        for k in range(n):
            idx = m[k]
            dh = fabs(hv[idx] - mh)
            if dh > 180.0:
                dh = 360.0 - dh
            dh = dh / 360.0
            ds = sv[idx] - ms
            di = iv[idx] - mi
            dev += dh * dh + ds * ds + di * di
    return dev


cdef inline Py_ssize_t _argbest(const double[::1] sums, const int64_t[::1] firsts,
                                Py_ssize_t n_classes) nogil:
    cdef Py_ssize_t best = -1, c
    cdef double best_sum = 0.0
    cdef int64_t best_first = 0
    for c in range(n_classes):
        if firsts[c] < 0:
            continue
        if best < 0 or sums[c] > best_sum or (sums[c] == best_sum and firsts[c] < best_first):
            best = c
            best_sum = sums[c]
            best_first = firsts[c]
    return best


def classify_pixels(hb, sb, ib, cond_attr, cond_val, rule_start, rule_class,
                    rule_certain, rule_strength, int n_classes):
    cdef const int32_t[::1] hbv = hb
    cdef const int32_t[::1] sbv = sb
    cdef const int32_t[::1] ibv = ib
    cdef const int32_t[::1] ca = cond_attr
    cdef const int32_t[::1] cv = cond_val
    cdef const int32_t[::1] rs = rule_start
    cdef const int32_t[::1] rc = rule_class
    cdef const uint8_t[::1] rcert = rule_certain
    cdef const double[::1] rstr = rule_strength
    cdef Py_ssize_t n = hbv.shape[0]
    cdef Py_ssize_t n_rules = rc.shape[0]
    out_arr = np.empty(n, dtype=np.int32)
    cdef int32_t[::1] out = out_arr
    sums_arr = np.zeros(n_classes, dtype=np.float64)
    firsts_arr = np.zeros(n_classes, dtype=np.int64)
    cdef double[::1] sums = sums_arr
    cdef int64_t[::1] firsts = firsts_arr
    cdef Py_ssize_t p, r, t, label, cls, c
    cdef int32_t pv0, pv1, pv2, a, v
    cdef int want, ok
    cdef Py_ssize_t matched, total
    cdef double w
    cdef bint found
    with nogil:
        for p in range(n):
            pv0 = hbv[p]
            pv1 = sbv[p]
            pv2 = ibv[p]
            label = -1
            for want in range(1, -1, -1):
                for c in range(n_classes):
                    sums[c] = 0.0
                    firsts[c] = -1
                found = False
                for r in range(n_rules):
                    if rcert[r] != want:
                        continue
                    ok = 1
                    for t in range(rs[r], rs[r + 1]):
                        a = ca[t]
                        v = cv[t]
                        if (pv0 if a == 0 else (pv1 if a == 1 else pv2)) != v:
                            ok = 0
                            break
                    if ok:
                        cls = rc[r]
                        sums[cls] += rstr[r]
                        if firsts[cls] < 0:
                            firsts[cls] = r
                        found = True
                if found:
                    label = _argbest(sums, firsts, n_classes)
                    break
            if label < 0:
                for c in range(n_classes):
                    sums[c] = 0.0
                    firsts[c] = -1
                found = False
                for r in range(n_rules):
                    total = rs[r + 1] - rs[r]
                    matched = 0
                    for t in range(rs[r], rs[r + 1]):
                        a = ca[t]
                        v = cv[t]
                        if (pv0 if a == 0 else (pv1 if a == 1 else pv2)) == v:
                            matched += 1
                    if matched == 0:
                        continue
                    w = rstr[r] * matched / total
                    if w <= 0.0:
                        continue
                    cls = rc[r]
                    sums[cls] += w
                    if firsts[cls] < 0:
                        firsts[cls] = r
                    found = True
                if found:
                    label = _argbest(sums, firsts, n_classes)
            out[p] = label
    return out_arr
