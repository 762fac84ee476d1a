"""Pure-numpy fallback for the hot kernels (env flag CARDEX_NO_NUMBA=1).

Must match numba_impl exactly, including summation order and tie-breaks.
"""

import numpy as np


def _pad_reflect101(src, r):
    return np.pad(src, r, mode="reflect")  # numpy "reflect" is reflect-101


def conv2d_reflect101(src, kernel):
    h, w = src.shape
    ks = kernel.shape[0]
    r = ks // 2
    padded = _pad_reflect101(src.astype(np.float64, copy=False), r)
    out = np.zeros((h, w), dtype=np.float64)
    # accumulate shifted views in (ky, kx) order: same float-add order per
    # pixel as the numba nested loop, so results are bit-identical
    for ky in range(ks):
        for kx in range(ks):
            out += kernel[ky, kx] * padded[ky : ky + h, kx : kx + w]
    return out


def nms4(mag, angle):
    h, w = mag.shape
    keep = np.zeros((h, w), dtype=np.bool_)
    m = mag[1 : h - 1, 1 : w - 1]
    deg = (angle[1 : h - 1, 1 : w - 1] % np.pi) * 180.0 / np.pi

    bins = [
        ((deg < 22.5) | (deg >= 157.5), (0, -1), (0, 1)),
        ((deg >= 22.5) & (deg < 67.5), (-1, -1), (1, 1)),
        ((deg >= 67.5) & (deg < 112.5), (-1, 0), (1, 0)),
        ((deg >= 112.5) & (deg < 157.5), (-1, 1), (1, -1)),
    ]
    for mask, (py, px), (ny, nx) in bins:
        prev = mag[1 + py : h - 1 + py, 1 + px : w - 1 + px]
        nxt = mag[1 + ny : h - 1 + ny, 1 + nx : w - 1 + nx]
        keep[1 : h - 1, 1 : w - 1] |= mask & (m > 0.0) & (m >= prev) & (m > nxt)
    return keep


def _dilate8(mask):
    out = mask.copy()
    out[1:, :] |= mask[:-1, :]
    out[:-1, :] |= mask[1:, :]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    out[1:, 1:] |= mask[:-1, :-1]
    out[1:, :-1] |= mask[:-1, 1:]
    out[:-1, 1:] |= mask[1:, :-1]
    out[:-1, :-1] |= mask[1:, 1:]
    return out


def hysteresis8(mag, keep, low, high):
    weak = keep & (mag >= low)
    out = keep & (mag >= high)
    while True:
        grown = _dilate8(out) & weak
        if grown.sum() == out.sum():
            return out
        out = grown


def warp_bilinear(src, hinv, out_h, out_w):
    h, w, c = src.shape
    xs, ys = np.meshgrid(np.arange(out_w, dtype=np.float64), np.arange(out_h, dtype=np.float64))
    d = hinv[2, 0] * xs + hinv[2, 1] * ys + hinv[2, 2]
    valid = d != 0.0
    d_safe = np.where(valid, d, 1.0)
    sx = (hinv[0, 0] * xs + hinv[0, 1] * ys + hinv[0, 2]) / d_safe
    sy = (hinv[1, 0] * xs + hinv[1, 1] * ys + hinv[1, 2]) / d_safe
    valid &= (sx >= 0.0) & (sy >= 0.0) & (sx <= w - 1.0) & (sy <= h - 1.0)

    sx = np.where(valid, sx, 0.0)
    sy = np.where(valid, sy, 0.0)
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (sx - x0)[:, :, np.newaxis]
    fy = (sy - y0)[:, :, np.newaxis]

    srcf = src.astype(np.float64, copy=False)
    v00 = srcf[y0, x0]
    v01 = srcf[y0, x1]
    v10 = srcf[y1, x0]
    v11 = srcf[y1, x1]
    top = v00 + (v01 - v00) * fx
    bot = v10 + (v11 - v10) * fx
    out = top + (bot - top) * fy
    out[~valid] = 0.0
    return out


def levenshtein_u32(a, b):
    n = a.size
    m = b.size
    if n == 0:
        return int(m)
    if m == 0:
        return int(n)
    idx = np.arange(m, dtype=np.int64)
    prev = np.arange(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        cost = (a[i - 1] != b).astype(np.int64)
        candidate = np.minimum(prev[:-1] + cost, prev[1:] + 1)
        # fold in the left-to-right insertion chain:
        # cur[j] = min over i<=j of candidate[i] + (j - i)
        cur = np.empty(m + 1, dtype=np.int64)
        cur[0] = i
        candidate = np.minimum(candidate, i + 1 + idx)  # chain from cur[0]
        cur[1:] = np.minimum.accumulate(candidate - idx) + idx
        prev = cur
    return int(prev[m])


def best_quad(pts):
    n = pts.shape[0]
    from itertools import combinations

    x = pts[:, 0]
    y = pts[:, 1]
    best_area = -1.0
    best = (-1, -1, -1, -1)
    for i, j, k, l in combinations(range(n), 4):
        area = abs(
            x[i] * y[j] - x[j] * y[i]
            + x[j] * y[k] - x[k] * y[j]
            + x[k] * y[l] - x[l] * y[k]
            + x[l] * y[i] - x[i] * y[l]
        ) * 0.5
        if area > best_area:
            best_area = area
            best = (i, j, k, l)
    return best_area, best[0], best[1], best[2], best[3]
