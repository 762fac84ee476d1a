"""Classical image operators: grayscale, normalization, blur, Canny,
homography estimation, perspective warp, cropping, and bbox-aware
augmentation.

All operators are pure functions. Border policy is reflect-101 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import accel
from .errors import DegenerateBox, DegenerateQuad, InvalidDomain, InvalidParameter
from .types import AbsBox, ImageBuffer, NormBox, BYTE, UNIT

# ITU-R BT.601 luma weights
_LUMA = (0.299, 0.587, 0.114)

CANNY_LOW_DEFAULT = 50.0
CANNY_HIGH_DEFAULT = 150.0
CANNY_BLUR_SIZE_DEFAULT = 5
CANNY_BLUR_SIGMA_DEFAULT = 1.4


@dataclass(frozen=True)
class Kernel2D:
    size: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if self.size % 2 == 0 or self.size < 1:
            raise InvalidParameter(f"kernel size must be odd and >= 1, got {self.size}")
        if w.shape != (self.size, self.size):
            raise InvalidParameter("weights shape must be size x size")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class Homography:
    """3x3 projective map, normalized so m[2,2] == 1."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=np.float64)
        if m.shape != (3, 3):
            raise DegenerateQuad("homography must be a 3x3 matrix")
        if abs(m[2, 2]) < 1e-15:
            raise DegenerateQuad("homography cannot be normalized (m[2,2] ~ 0)")
        m = m / m[2, 2]
        if abs(np.linalg.det(m)) <= 1e-12:
            raise DegenerateQuad("homography is singular")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map an (n, 2) array of points."""
        pts = np.asarray(points, dtype=np.float64)
        ones = np.ones((pts.shape[0], 1))
        proj = np.hstack([pts, ones]) @ self.m.T
        return proj[:, :2] / proj[:, 2:3]

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.m))


@dataclass(frozen=True)
class EdgeMap:
    edges: np.ndarray  # bool (h, w)

    @property
    def width(self) -> int:
        return self.edges.shape[1]

    @property
    def height(self) -> int:
        return self.edges.shape[0]


@dataclass(frozen=True)
class AugmentSpec:
    """One augmentation op: flip_h, flip_v, rotate90_cw,
    brightness_contrast(alpha, beta), or scale(factor)."""

    op: str
    alpha: float = 1.0
    beta: float = 0.0
    factor: float = 1.0

    _OPS = ("flip_h", "flip_v", "rotate90_cw", "brightness_contrast", "scale")

    def __post_init__(self):
        if self.op not in self._OPS:
            raise InvalidParameter(f"unknown augmentation op {self.op!r}")
        if self.op == "brightness_contrast" and self.alpha <= 0.0:
            raise InvalidParameter("contrast gain alpha must be > 0")
        if self.op == "scale" and self.factor <= 0.0:
            raise InvalidParameter("scale factor must be > 0")


def _as_float(img: ImageBuffer) -> np.ndarray:
    return img.pixels.astype(np.float64)


def _from_float(values: np.ndarray, domain: str) -> ImageBuffer:
    if domain == BYTE:
        return ImageBuffer(np.clip(np.round(values), 0, 255).astype(np.uint8))
    return ImageBuffer(np.clip(values, 0.0, 1.0))


def to_grayscale(img: ImageBuffer) -> ImageBuffer:
    """BT.601 luma conversion; 1-channel input passes through unchanged."""
    if img.channels == 1:
        return img
    px = _as_float(img)
    luma = _LUMA[0] * px[:, :, 0] + _LUMA[1] * px[:, :, 1] + _LUMA[2] * px[:, :, 2]
    return _from_float(luma[:, :, np.newaxis], img.domain)


def normalize_pixels(img: ImageBuffer) -> ImageBuffer:
    """Map byte samples to the unit interval (v / 255)."""
    if img.domain != BYTE:
        raise InvalidDomain("normalize_pixels expects a byte-domain image")
    return ImageBuffer(img.pixels.astype(np.float64) / 255.0)


def gaussian_kernel(size: int, sigma: float) -> Kernel2D:
    if size < 1 or size % 2 == 0:
        raise InvalidParameter(f"kernel size must be odd and >= 1, got {size}")
    if sigma <= 0.0:
        raise InvalidParameter(f"sigma must be > 0, got {sigma}")
    r = size // 2
    ax = np.arange(-r, r + 1, dtype=np.float64)
    xx, yy = np.meshgrid(ax, ax)
    w = np.exp(-(xx * xx + yy * yy) / (2.0 * sigma * sigma))
    return Kernel2D(size, w / w.sum())


def gaussian_blur(img: ImageBuffer, size: int, sigma: float) -> ImageBuffer:
    if img.channels != 1:
        raise InvalidDomain("gaussian_blur expects a grayscale image")
    k = gaussian_kernel(size, sigma)
    out = accel.conv2d_reflect101(_as_float(img)[:, :, 0], k.weights)
    return _from_float(out[:, :, np.newaxis], img.domain)


_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_SOBEL_Y = _SOBEL_X.T.copy()


def sobel_gradients(img: ImageBuffer):
    """Returns (gx, gy, magnitude, angle); angle in (-pi, pi]."""
    if img.channels != 1:
        raise InvalidDomain("sobel_gradients expects a grayscale image")
    src = _as_float(img)[:, :, 0]
    gx = accel.conv2d_reflect101(src, _SOBEL_X)
    gy = accel.conv2d_reflect101(src, _SOBEL_Y)
    magnitude = np.hypot(gx, gy)
    angle = np.arctan2(gy, gx)
    return gx, gy, magnitude, angle


def canny_edges(
    img: ImageBuffer,
    low: float = CANNY_LOW_DEFAULT,
    high: float = CANNY_HIGH_DEFAULT,
    blur_size: int = CANNY_BLUR_SIZE_DEFAULT,
    blur_sigma: float = CANNY_BLUR_SIGMA_DEFAULT,
) -> EdgeMap:
    """Blur -> Sobel -> 4-direction NMS -> 8-connected hysteresis."""
    if not (0.0 <= low < high):
        raise InvalidParameter(f"need 0 <= low < high, got low={low} high={high}")
    gray = to_grayscale(img)
    blurred = gaussian_blur(gray, blur_size, blur_sigma)
    _, _, magnitude, angle = sobel_gradients(blurred)
    keep = accel.nms4(magnitude, angle)
    edges = accel.hysteresis8(magnitude, keep, float(low), float(high))
    return EdgeMap(edges)


def solve_homography(src: np.ndarray, dst: np.ndarray) -> Homography:
    """Direct linear transform from 4 source to 4 destination points."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != (4, 2) or dst.shape != (4, 2):
        raise DegenerateQuad("need exactly 4 source and 4 destination points")
    for pts in (src, dst):
        if _has_collinear_triple(pts):
            raise DegenerateQuad("three of the four points are collinear")
    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i in range(4):
        x, y = src[i]
        u, v = dst[i]
        a[2 * i] = [x, y, 1, 0, 0, 0, -u * x, -u * y]
        a[2 * i + 1] = [0, 0, 0, x, y, 1, -v * x, -v * y]
        b[2 * i] = u
        b[2 * i + 1] = v
    try:
        sol = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise DegenerateQuad("homography system is singular") from exc
    m = np.append(sol, 1.0).reshape(3, 3)
    return Homography(m)


def _has_collinear_triple(pts: np.ndarray, eps: float = 1e-9) -> bool:
    scale = max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]), 1.0)
    for i in range(4):
        for j in range(i + 1, 4):
            for k in range(j + 1, 4):
                v1 = pts[j] - pts[i]
                v2 = pts[k] - pts[i]
                if abs(v1[0] * v2[1] - v1[1] * v2[0]) < eps * scale * scale:
                    return True
    return False


def warp_perspective(img: ImageBuffer, h: Homography, out_w: int, out_h: int) -> ImageBuffer:
    """Inverse-map bilinear warp; samples outside the source are black."""
    if out_w < 1 or out_h < 1:
        raise InvalidParameter("output dimensions must be >= 1")
    hinv = np.linalg.inv(h.m)
    out = accel.warp_bilinear(_as_float(img), hinv, out_h, out_w)
    return _from_float(out, img.domain)


def crop(img: ImageBuffer, box: AbsBox) -> ImageBuffer:
    """Sub-image of the integer rectangle covering box, clamped to bounds."""
    x1 = max(int(np.floor(box.x1)), 0)
    y1 = max(int(np.floor(box.y1)), 0)
    x2 = min(int(np.ceil(box.x2)), img.width)
    y2 = min(int(np.ceil(box.y2)), img.height)
    if x2 <= x1 or y2 <= y1:
        raise DegenerateBox("crop box does not intersect the image")
    return ImageBuffer(img.pixels[y1:y2, x1:x2])


def _resize(img: ImageBuffer, out_w: int, out_h: int) -> ImageBuffer:
    if (out_w, out_h) == (img.width, img.height):
        return img
    sx = img.width / out_w
    sy = img.height / out_h
    hinv = np.array([[sx, 0.0, 0.0], [0.0, sy, 0.0], [0.0, 0.0, 1.0]])
    out = accel.warp_bilinear(_as_float(img), hinv, out_h, out_w)
    return _from_float(out, img.domain)


def augment(img: ImageBuffer, boxes: list[NormBox], spec: AugmentSpec):
    """Apply one augmentation to an image and its boxes consistently."""
    if spec.op == "flip_h":
        out = ImageBuffer(img.pixels[:, ::-1])
        new_boxes = [NormBox(1.0 - b.cx, b.cy, b.w, b.h) for b in boxes]
    elif spec.op == "flip_v":
        out = ImageBuffer(img.pixels[::-1])
        new_boxes = [NormBox(b.cx, 1.0 - b.cy, b.w, b.h) for b in boxes]
    elif spec.op == "rotate90_cw":
        out = ImageBuffer(np.rot90(img.pixels, k=-1, axes=(0, 1)))
        new_boxes = [NormBox(1.0 - b.cy, b.cx, b.h, b.w) for b in boxes]
    elif spec.op == "brightness_contrast":
        out = _from_float(spec.alpha * _as_float(img) + spec.beta, img.domain)
        new_boxes = list(boxes)
    elif spec.op == "scale":
        out_w = max(1, int(round(img.width * spec.factor)))
        out_h = max(1, int(round(img.height * spec.factor)))
        out = _resize(img, out_w, out_h)
        new_boxes = list(boxes)
    else:  # pragma: no cover - AugmentSpec validates op
        raise InvalidParameter(f"unknown op {spec.op!r}")
    return out, new_boxes
