"""Side-by-side timing of the numba and pure-numpy kernel backends.

Run from the repo root:  python3 benchmarks/bench_accel.py
The first numba call per kernel includes JIT compilation; a warmup pass is
timed separately so the steady-state numbers are comparable.
"""

import time

import numpy as np

from cardex.accel import numba_impl, numpy_impl


def timeit(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def gaussian(size, sigma):
    r = size // 2
    ax = np.arange(-r, r + 1, dtype=np.float64)
    xx, yy = np.meshgrid(ax, ax)
    w = np.exp(-(xx * xx + yy * yy) / (2 * sigma * sigma))
    return w / w.sum()


def main():
    rng = np.random.default_rng(0)

    img = rng.uniform(0, 255, size=(800, 1280))
    kernel = gaussian(5, 1.4)
    color = rng.uniform(0, 255, size=(800, 1280, 1))
    hinv = np.array([[0.9, 0.02, 3.0], [-0.01, 1.05, -2.0], [1e-5, -2e-5, 1.0]])
    a = rng.integers(0x900, 0x97F, size=400).astype(np.uint32)
    b = rng.integers(0x900, 0x97F, size=400).astype(np.uint32)
    angles = np.sort(rng.uniform(0, 2 * np.pi, size=40))
    hull = np.ascontiguousarray(
        np.column_stack([np.cos(angles), np.sin(angles)]) * rng.uniform(50, 100, size=(40, 1))
    )

    gx = numpy_impl.conv2d_reflect101(img, np.array([[-1.0, 0, 1], [-2, 0, 2], [-1, 0, 1]]))
    gy = numpy_impl.conv2d_reflect101(img, np.array([[-1.0, -2, -1], [0, 0, 0], [1, 2, 1]]))
    mag = np.hypot(gx, gy)
    ang = np.arctan2(gy, gx)
    keep = numpy_impl.nms4(mag, ang)

    cases = [
        ("conv2d 5x5 on 1280x800", (img, kernel), "conv2d_reflect101"),
        ("nms4 on 1280x800", (mag, ang), "nms4"),
        ("hysteresis8 on 1280x800", (mag, keep, 50.0, 150.0), "hysteresis8"),
        ("warp_bilinear 1280x800", (color, hinv, 800, 1280), "warp_bilinear"),
        ("levenshtein 400x400", (a, b), "levenshtein_u32"),
        ("best_quad over 40 hull points", (hull,), "best_quad"),
    ]

    print(f"{'kernel':<32} {'numba (warm)':>14} {'numpy':>12} {'speedup':>9}")
    for label, args, name in cases:
        nb = getattr(numba_impl, name)
        npf = getattr(numpy_impl, name)
        compile_time = timeit(nb, *args, repeats=1)  # includes JIT on first use
        t_nb = timeit(nb, *args)
        t_np = timeit(npf, *args)
        out_nb = nb(*args)
        out_np = npf(*args)
        if isinstance(out_nb, np.ndarray):
            assert np.array_equal(out_nb, out_np), f"{name}: backends diverge"
        print(f"{label:<32} {t_nb * 1e3:>11.2f} ms {t_np * 1e3:>9.2f} ms {t_np / t_nb:>8.1f}x"
              f"   (first call {compile_time * 1e3:.0f} ms)")


if __name__ == "__main__":
    main()
