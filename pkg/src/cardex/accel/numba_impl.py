"""numba @njit implementations of the hot kernels.

Semantics (padding, tie-breaks, summation order) must stay in lockstep with
``numpy_impl``; the test suite cross-checks the two backends.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _reflect101(i, n):
    # reflect without repeating the border sample: -1 -> 1, n -> n-2;
    # folds repeatedly so radii larger than the axis still resolve
    if n == 1:
        return 0
    while i < 0 or i >= n:
        if i < 0:
            i = -i
        if i >= n:
            i = 2 * n - 2 - i
    return i


@njit(cache=True)
def conv2d_reflect101(src, kernel):
    h, w = src.shape
    ks = kernel.shape[0]
    r = ks // 2
    out = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for ky in range(ks):
                sy = _reflect101(y + ky - r, h)
                for kx in range(ks):
                    sx = _reflect101(x + kx - r, w)
                    acc += kernel[ky, kx] * src[sy, sx]
            out[y, x] = acc
    return out


@njit(cache=True)
def nms4(mag, angle):
    """Non-maximum suppression with the gradient angle quantized to 4 bins.

    Keeps a pixel when its magnitude is >= the neighbor behind it and
    strictly > the neighbor ahead of it along the gradient; the asymmetry
    breaks two-pixel plateau ties deterministically.
    """
    h, w = mag.shape
    keep = np.zeros((h, w), dtype=np.bool_)
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            m = mag[y, x]
            if m <= 0.0:
                continue
            a = angle[y, x] % np.pi
            deg = a * 180.0 / np.pi
            if deg < 22.5 or deg >= 157.5:
                prev = mag[y, x - 1]
                nxt = mag[y, x + 1]
            elif deg < 67.5:
                prev = mag[y - 1, x - 1]
                nxt = mag[y + 1, x + 1]
            elif deg < 112.5:
                prev = mag[y - 1, x]
                nxt = mag[y + 1, x]
            else:
                prev = mag[y - 1, x + 1]
                nxt = mag[y + 1, x - 1]
            if m >= prev and m > nxt:
                keep[y, x] = True
    return keep


@njit(cache=True)
def hysteresis8(mag, keep, low, high):
    """Two-threshold hysteresis over 8-connectivity, BFS from strong pixels."""
    h, w = mag.shape
    out = np.zeros((h, w), dtype=np.bool_)
    stack_y = np.empty(h * w, dtype=np.int64)
    stack_x = np.empty(h * w, dtype=np.int64)
    top = 0
    for y in range(h):
        for x in range(w):
            if keep[y, x] and mag[y, x] >= high:
                out[y, x] = True
                stack_y[top] = y
                stack_x[top] = x
                top += 1
    while top > 0:
        top -= 1
        y = stack_y[top]
        x = stack_x[top]
        for dy in range(-1, 2):
            for dx in range(-1, 2):
                ny = y + dy
                nx = x + dx
                if 0 <= ny < h and 0 <= nx < w and not out[ny, nx]:
                    if keep[ny, nx] and mag[ny, nx] >= low:
                        out[ny, nx] = True
                        stack_y[top] = ny
                        stack_x[top] = nx
                        top += 1
    return out


@njit(cache=True)
def warp_bilinear(src, hinv, out_h, out_w):
    """Inverse-map warp with bilinear sampling; outside samples are zero."""
    h, w, c = src.shape
    out = np.zeros((out_h, out_w, c), dtype=np.float64)
    for y in range(out_h):
        for x in range(out_w):
            d = hinv[2, 0] * x + hinv[2, 1] * y + hinv[2, 2]
            if d == 0.0:
                continue
            sx = (hinv[0, 0] * x + hinv[0, 1] * y + hinv[0, 2]) / d
            sy = (hinv[1, 0] * x + hinv[1, 1] * y + hinv[1, 2]) / d
            if sx < 0.0 or sy < 0.0 or sx > w - 1.0 or sy > h - 1.0:
                continue
            x0 = int(np.floor(sx))
            y0 = int(np.floor(sy))
            x1 = min(x0 + 1, w - 1)
            y1 = min(y0 + 1, h - 1)
            fx = sx - x0
            fy = sy - y0
            for ch in range(c):
                v00 = src[y0, x0, ch]
                v01 = src[y0, x1, ch]
                v10 = src[y1, x0, ch]
                v11 = src[y1, x1, ch]
                top = v00 + (v01 - v00) * fx
                bot = v10 + (v11 - v10) * fx
                out[y, x, ch] = top + (bot - top) * fy
    return out


@njit(cache=True)
def levenshtein_u32(a, b):
    n = a.size
    m = b.size
    if n == 0:
        return m
    if m == 0:
        return n
    prev = np.arange(m + 1, dtype=np.int64)
    cur = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            cost = 0 if ai == b[j - 1] else 1
            best = prev[j - 1] + cost
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]


@njit(cache=True)
def best_quad(pts):
    """Largest-area quadrilateral over points given in convex (hull) order.

    Returns (area, i, j, k, l) with indices in hull order.
    """
    n = pts.shape[0]
    best_area = -1.0
    bi = bj = bk = bl = -1
    for i in range(n - 3):
        for j in range(i + 1, n - 2):
            for k in range(j + 1, n - 1):
                for l in range(k + 1, n):
                    # shoelace over the 4 ordered vertices
                    area = (
                        pts[i, 0] * pts[j, 1] - pts[j, 0] * pts[i, 1]
                        + pts[j, 0] * pts[k, 1] - pts[k, 0] * pts[j, 1]
                        + pts[k, 0] * pts[l, 1] - pts[l, 0] * pts[k, 1]
                        + pts[l, 0] * pts[i, 1] - pts[i, 0] * pts[l, 1]
                    )
                    if area < 0.0:
                        area = -area
                    area *= 0.5
                    if area > best_area:
                        best_area = area
                        bi, bj, bk, bl = i, j, k, l
    return best_area, bi, bj, bk, bl
