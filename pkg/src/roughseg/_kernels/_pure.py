"""Pure-Python compute kernels.

Reference twin of the compiled backend (``roughseg._kernels._native``).
Both backends implement the same operations with the same floating-point
evaluation order, so their results are bit-identical. Keep every loop
scalar and sequential: swapping one in for a numpy reduction would change
summation order and break cross-backend equality.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

_DEG2RAD = math.pi / 180.0
_RAD2DEG = 180.0 / math.pi


def _hsi(ri: int, gi: int, bi: int) -> tuple[float, float, float]:
    r = ri / 255.0
    g = gi / 255.0
    b = bi / 255.0
    total = r + g + b
    i = total / 3.0
    if ri == gi and gi == bi:
        # achromatic convention: hue and saturation collapse to 0
        return 0.0, 0.0, i
    mn = r
    if g < mn:
        mn = g
    if b < mn:
        mn = b
    s = 1.0 - 3.0 * mn / total
    num = 0.5 * ((r - g) + (r - b))
    den = math.sqrt((r - g) * (r - g) + (r - b) * (g - b))
    x = num / den
    if x > 1.0:
        x = 1.0
    elif x < -1.0:
        x = -1.0
    h = math.acos(x) * _RAD2DEG
    if bi > gi:
        h = 360.0 - h
    return h, s, i


def _dist(h1: float, s1: float, i1: float, h2: float, s2: float, i2: float) -> float:
    dh = abs(h1 - h2)
    if dh > 180.0:
        dh = 360.0 - dh
    return dh / 360.0 + abs(s1 - s2) + abs(i1 - i2)


def rgb_to_hsi_pixel(r: int, g: int, b: int) -> tuple[float, float, float]:
    return _hsi(r, g, b)


def rgb_to_hsi_planes(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    hl: list[float] = []
    sl: list[float] = []
    il: list[float] = []
    for ri, gi, bi in rgb.tolist():
        h, s, i = _hsi(ri, gi, bi)
        hl.append(h)
        sl.append(s)
        il.append(i)
    return (
        np.asarray(hl, dtype=np.float64),
        np.asarray(sl, dtype=np.float64),
        np.asarray(il, dtype=np.float64),
    )


def hsi_distance(h1: float, s1: float, i1: float, h2: float, s2: float, i2: float) -> float:
    return _dist(h1, s1, i1, h2, s2, i2)


def population_counts(
    h: np.ndarray,
    s: np.ndarray,
    i: np.ndarray,
    cell_pixels: np.ndarray,
    cell_starts: np.ndarray,
    active_cells: np.ndarray,
    seed_h: float,
    seed_s: float,
    seed_i: float,
    theta: float,
) -> np.ndarray:
    hl = h.tolist()
    sl = s.tolist()
    il = i.tolist()
    px = cell_pixels.tolist()
    starts = cell_starts.tolist()
    out = np.zeros(len(active_cells), dtype=np.int64)
    for j, cell in enumerate(active_cells.tolist()):
        cnt = 0
        for t in range(starts[cell], starts[cell + 1]):
            p = px[t]
            if _dist(hl[p], sl[p], il[p], seed_h, seed_s, seed_i) <= theta:
                cnt += 1
        out[j] = cnt
    return out


def max_hue_index(h: np.ndarray, assignment: np.ndarray) -> int:
    hl = h.tolist()
    al = assignment.tolist()
    best = -1
    best_h = 0.0
    for k in range(len(hl)):
        if al[k] < 0 and (best < 0 or hl[k] > best_h):
            best = k
            best_h = hl[k]
    return best


def cluster_sq_dev(h: np.ndarray, s: np.ndarray, i: np.ndarray, members: np.ndarray) -> float:
    m = members.tolist()
    n = len(m)
    if n == 0:
        return 0.0
    hl = h.tolist()
    sl = s.tolist()
    il = i.tolist()
    sx = 0.0
    sy = 0.0
    ssum = 0.0
    isum = 0.0
    first = m[0]
    hmin = hmax = hl[first]
    smin = smax = sl[first]
    imin = imax = il[first]
    for idx in m:
        hv = hl[idx]
        sv = sl[idx]
        iv = il[idx]
        hr = hv * _DEG2RAD
        sx += math.cos(hr)
        sy += math.sin(hr)
        ssum += sv
        isum += iv
        if hv < hmin:
            hmin = hv
        elif hv > hmax:
            hmax = hv
        if sv < smin:
            smin = sv
        elif sv > smax:
            smax = sv
        if iv < imin:
            imin = iv
        elif iv > imax:
            imax = iv
    # a uniform component's mean is that exact value, so fully homogeneous
    # clusters come out at exactly zero deviation (the sentinel case)
    if hmin == hmax:
        mh = hmin
    else:
        mh = math.atan2(sy, sx) * _RAD2DEG
        if mh < 0.0:
            mh += 360.0
    ms = smin if smin == smax else ssum / n
    mi = imin if imin == imax else isum / n
    dev = 0.0
    for idx in m:
        dh = abs(hl[idx] - mh)
        if dh > 180.0:
            dh = 360.0 - dh
        dh = dh / 360.0
        ds = sl[idx] - ms
        di = il[idx] - mi
        dev += dh * dh + ds * ds + di * di
    return dev


def _argbest(sums: list[float], firsts: list[int], n_classes: int) -> int:
    best = -1
    best_sum = 0.0
    best_first = 0
    for c in range(n_classes):
        if firsts[c] < 0:
            continue
        if best < 0 or sums[c] > best_sum or (sums[c] == best_sum and firsts[c] < best_first):
            best = c
            best_sum = sums[c]
            best_first = firsts[c]
    return best


def classify_pixels(
    hb: np.ndarray,
    sb: np.ndarray,
    ib: np.ndarray,
    cond_attr: np.ndarray,
    cond_val: np.ndarray,
    rule_start: np.ndarray,
    rule_class: np.ndarray,
    rule_certain: np.ndarray,
    rule_strength: np.ndarray,
    n_classes: int,
) -> np.ndarray:
    n = len(hb)
    hbl = hb.tolist()
    sbl = sb.tolist()
    ibl = ib.tolist()
    ca = cond_attr.tolist()
    cv = cond_val.tolist()
    rs = rule_start.tolist()
    rc = rule_class.tolist()
    rcert = rule_certain.tolist()
    rstr = rule_strength.tolist()
    n_rules = len(rc)
    sums = [0.0] * n_classes
    firsts = [-1] * n_classes
    out = np.empty(n, dtype=np.int32)
    for p in range(n):
        pv = (hbl[p], sbl[p], ibl[p])
        label = -1
        # full matches, certain rules taking precedence over possible ones
        for want in (1, 0):
            for c in range(n_classes):
                sums[c] = 0.0
                firsts[c] = -1
            found = False
            for r in range(n_rules):
                if rcert[r] != want:
                    continue
                ok = True
                for t in range(rs[r], rs[r + 1]):
                    if pv[ca[t]] != cv[t]:
                        ok = False
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
            # partial matching: every rule votes proportionally to the
            # fraction of its conditions that hold
            for c in range(n_classes):
                sums[c] = 0.0
                firsts[c] = -1
            found = False
            for r in range(n_rules):
                total = rs[r + 1] - rs[r]
                matched = 0
                for t in range(rs[r], rs[r + 1]):
                    if pv[ca[t]] == cv[t]:
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
    return out
