"""Shared value types: images, boxes, detections, annotations, results.

All types are immutable after construction and safe to share across threads.
Geometry convention: origin at the top-left corner, y grows downward.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBox, InvalidDomain

BYTE = "byte"
UNIT = "unit"


@dataclass(frozen=True)
class ImageBuffer:
    """Raster image backed by a read-only (height, width, channels) array.

    ``byte`` images hold uint8 samples in [0, 255]; ``unit`` images hold
    float64 samples in [0.0, 1.0].
    """

    pixels: np.ndarray

    def __post_init__(self):
        px = self.pixels
        if px.ndim == 2:
            px = px[:, :, np.newaxis]
        if px.ndim != 3:
            raise InvalidDomain(f"expected 2D or 3D pixel array, got ndim={px.ndim}")
        if px.shape[2] not in (1, 3):
            raise InvalidDomain(f"expected 1 or 3 channels, got {px.shape[2]}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise InvalidDomain("image must be at least 1x1")
        if px.dtype == np.uint8:
            pass
        elif np.issubdtype(px.dtype, np.floating):
            px = px.astype(np.float64, copy=False)
            if px.size and (px.min() < 0.0 or px.max() > 1.0):
                raise InvalidDomain("unit-domain samples must lie in [0, 1]")
        else:
            raise InvalidDomain(f"unsupported dtype {px.dtype}")
        px = np.ascontiguousarray(px)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def domain(self) -> str:
        return BYTE if self.pixels.dtype == np.uint8 else UNIT


@dataclass(frozen=True)
class NormBox:
    """Center-format box normalized to image dimensions (YOLO convention)."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        if not (0.0 <= self.cx <= 1.0 and 0.0 <= self.cy <= 1.0):
            raise DegenerateBox(f"center outside unit square: ({self.cx}, {self.cy})")
        if not (0.0 < self.w <= 1.0 and 0.0 < self.h <= 1.0):
            raise DegenerateBox(f"width/height outside (0, 1]: ({self.w}, {self.h})")


@dataclass(frozen=True)
class AbsBox:
    """Corner-format box in pixel coordinates."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise DegenerateBox(f"empty box: ({self.x1},{self.y1},{self.x2},{self.y2})")

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)


@dataclass(frozen=True)
class CategorySchema:
    """Ordered field names for one card side."""

    side: str  # "front" | "back"
    names: tuple[str, ...]

    def __post_init__(self):
        if self.side not in ("front", "back"):
            raise InvalidDomain(f"side must be front or back, got {self.side!r}")
        names = tuple(self.names)
        if not names:
            raise InvalidDomain("schema needs at least one category name")
        if len(set(names)) != len(names):
            raise InvalidDomain("category names must be unique")
        object.__setattr__(self, "names", names)

    def __len__(self) -> int:
        return len(self.names)

    def valid_category(self, cat: int) -> bool:
        return 0 <= cat < len(self.names)


@dataclass(frozen=True)
class Detection:
    category: int
    confidence: float
    box: NormBox

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise InvalidDomain(f"confidence outside [0,1]: {self.confidence}")
        if self.category < 0:
            raise InvalidDomain(f"negative category id: {self.category}")


@dataclass(frozen=True)
class GroundTruth:
    category: int
    box: NormBox

    def __post_init__(self):
        if self.category < 0:
            raise InvalidDomain(f"negative category id: {self.category}")


@dataclass(frozen=True)
class AnnotationRecord:
    """One label file's parsed contents, bound to its image."""

    image_path: str
    entries: tuple[tuple[int, NormBox], ...]


@dataclass(frozen=True)
class FieldValue:
    raw_text: str
    corrected_text: str
    confidence: float
    correction_applied: bool

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise InvalidDomain(f"confidence outside [0,1]: {self.confidence}")
        if not self.correction_applied and self.corrected_text != self.raw_text:
            raise InvalidDomain("corrected_text must equal raw_text when no correction applied")


@dataclass(frozen=True)
class ExtractionResult:
    side: str
    fields: dict[str, FieldValue] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "side": self.side,
            "fields": {
                name: {
                    "raw_text": fv.raw_text,
                    "corrected_text": fv.corrected_text,
                    "confidence": fv.confidence,
                    "correction_applied": fv.correction_applied,
                }
                for name, fv in self.fields.items()
            },
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExtractionResult":
        return cls(
            side=d["side"],
            fields={
                name: FieldValue(
                    raw_text=fv["raw_text"],
                    corrected_text=fv["corrected_text"],
                    confidence=fv["confidence"],
                    correction_applied=fv["correction_applied"],
                )
                for name, fv in d["fields"].items()
            },
            warnings=tuple(d.get("warnings", ())),
        )


def clamp_box(box: NormBox) -> NormBox:
    """Clamp a box's corners into the unit square and recompute center format.

    Raises DegenerateBox if nothing remains after clamping.
    """
    x1 = min(max(box.cx - box.w / 2.0, 0.0), 1.0)
    x2 = min(max(box.cx + box.w / 2.0, 0.0), 1.0)
    y1 = min(max(box.cy - box.h / 2.0, 0.0), 1.0)
    y2 = min(max(box.cy + box.h / 2.0, 0.0), 1.0)
    if x2 - x1 <= 0.0 or y2 - y1 <= 0.0:
        raise DegenerateBox("box degenerates to zero area after clamping")
    return NormBox((x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1)


def norm_to_abs(box: NormBox, width: int, height: int) -> AbsBox:
    """Convert a normalized center-format box to pixel corner coordinates."""
    if width < 1 or height < 1:
        raise InvalidDomain("image dimensions must be >= 1")
    return AbsBox(
        (box.cx - box.w / 2.0) * width,
        (box.cy - box.h / 2.0) * height,
        (box.cx + box.w / 2.0) * width,
        (box.cy + box.h / 2.0) * height,
    )


def abs_to_norm(box: AbsBox, width: int, height: int) -> NormBox:
    """Inverse of norm_to_abs for boxes inside the image."""
    if width < 1 or height < 1:
        raise InvalidDomain("image dimensions must be >= 1")
    return NormBox(
        (box.x1 + box.x2) / 2.0 / width,
        (box.y1 + box.y2) / 2.0 / height,
        (box.x2 - box.x1) / width,
        (box.y2 - box.y1) / height,
    )


DEFAULT_FRONT_SCHEMA = CategorySchema(
    side="front",
    names=("name", "date_of_birth", "citizenship_number", "district", "gender"),
)
DEFAULT_BACK_SCHEMA = CategorySchema(
    side="back",
    names=("issuing_officer", "date_of_issue"),
)
