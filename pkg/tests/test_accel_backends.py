"""Cross-checks the numba and pure-numpy backends bit-for-bit on the same
inputs, independent of which backend the package selected at import time."""

import numpy as np
import pytest

from cardex.accel import BACKEND, numba_impl, numpy_impl

BACKENDS = (numba_impl, numpy_impl)


def test_backend_selection_reports_a_known_name():
    assert BACKEND in ("numba", "numpy")


class TestConv2d:
    def test_bit_identical(self, rng):
        for size, sigma in ((3, 1.0), (5, 1.4)):
            r = size // 2
            ax = np.arange(-r, r + 1, dtype=np.float64)
            xx, yy = np.meshgrid(ax, ax)
            kernel = np.exp(-(xx * xx + yy * yy) / (2 * sigma * sigma))
            kernel /= kernel.sum()
            for shape in ((16, 16), (7, 23), (1, 9), (9, 1)):
                src = rng.uniform(0, 255, size=shape)
                a = numba_impl.conv2d_reflect101(src, kernel)
                b = numpy_impl.conv2d_reflect101(src, kernel)
                np.testing.assert_array_equal(a, b)


class TestNmsHysteresis:
    def make_field(self, rng, shape=(24, 31)):
        src = rng.uniform(0, 255, size=shape)
        gx = np.diff(src, axis=1, prepend=src[:, :1])
        gy = np.diff(src, axis=0, prepend=src[:1])
        magnitude = np.hypot(gx, gy)
        angle = np.arctan2(gy, gx)
        return magnitude, angle

    def test_nms_bit_identical(self, rng):
        for _ in range(5):
            magnitude, angle = self.make_field(rng)
            np.testing.assert_array_equal(
                numba_impl.nms4(magnitude, angle), numpy_impl.nms4(magnitude, angle)
            )

    def test_hysteresis_bit_identical(self, rng):
        for _ in range(5):
            magnitude, angle = self.make_field(rng)
            keep = numba_impl.nms4(magnitude, angle)
            np.testing.assert_array_equal(
                numba_impl.hysteresis8(magnitude, keep, 20.0, 60.0),
                numpy_impl.hysteresis8(magnitude, keep, 20.0, 60.0),
            )


class TestWarp:
    def test_bit_identical(self, rng):
        src = rng.uniform(0, 255, size=(20, 30, 1))
        hinv = np.array([[0.9, 0.05, 2.0], [-0.03, 1.1, -1.0], [1e-4, -2e-4, 1.0]])
        a = numba_impl.warp_bilinear(src, hinv, 25, 35)
        b = numpy_impl.warp_bilinear(src, hinv, 25, 35)
        np.testing.assert_array_equal(a, b)

    def test_three_channel(self, rng):
        src = rng.uniform(0, 255, size=(12, 14, 3))
        hinv = np.eye(3)
        np.testing.assert_array_equal(
            numba_impl.warp_bilinear(src, hinv, 12, 14),
            numpy_impl.warp_bilinear(src, hinv, 12, 14),
        )


class TestLevenshtein:
    def test_agreement_on_random_strings(self, rng):
        for _ in range(100):
            a = rng.integers(0x900, 0x97F, size=rng.integers(0, 15)).astype(np.uint32)
            b = rng.integers(0x900, 0x97F, size=rng.integers(0, 15)).astype(np.uint32)
            assert numba_impl.levenshtein_u32(a, b) == numpy_impl.levenshtein_u32(a, b)


class TestBestQuad:
    def test_same_quad_on_hull_points(self, rng):
        for _ in range(10):
            n = int(rng.integers(4, 12))
            angles = np.sort(rng.uniform(0, 2 * np.pi, size=n))
            radii = rng.uniform(5, 10, size=n)
            pts = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
            pts = np.ascontiguousarray(pts)
            a = numba_impl.best_quad(pts)
            b = numpy_impl.best_quad(pts)
            assert a[0] == pytest.approx(b[0], rel=1e-12)
            assert a[1:] == b[1:]
