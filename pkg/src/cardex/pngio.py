"""PNG/JPEG raster I/O for the CLI and service layers (Pillow-backed)."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import InvalidDomain
from .types import ImageBuffer


def load_image(path) -> ImageBuffer:
    with Image.open(Path(path)) as im:
        return _from_pil(im)


def load_image_bytes(data: bytes) -> ImageBuffer:
    try:
        with Image.open(io.BytesIO(data)) as im:
            return _from_pil(im)
    except UnidentifiedImageError as exc:
        raise InvalidDomain("bytes do not decode to a supported image") from exc


def _from_pil(im: Image.Image) -> ImageBuffer:
    if im.mode in ("L",):
        arr = np.asarray(im, dtype=np.uint8)[:, :, np.newaxis]
    else:
        arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    return ImageBuffer(arr)


def save_png(img: ImageBuffer, path) -> None:
    Image.fromarray(_to_uint8(img)).save(Path(path), format="PNG")


def png_bytes(img: ImageBuffer) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(_to_uint8(img)).save(buf, format="PNG")
    return buf.getvalue()


def _to_uint8(img: ImageBuffer) -> np.ndarray:
    px = img.pixels
    if px.dtype != np.uint8:
        px = np.clip(np.round(px * 255.0), 0, 255).astype(np.uint8)
    return px[:, :, 0] if px.shape[2] == 1 else px
