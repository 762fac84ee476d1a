"""Extraction pipeline: card-boundary rectification, pluggable detector and
OCR ports, per-field crop preprocessing, and field assembly with text
corrections.

The neural detector itself is out of scope; a fixture detector replays
precomputed detection dumps and the OCR port shells out to an external
command (or a stub in tests). An embedded inference runtime would slot in
as another DetectorPort implementation.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Protocol, runtime_checkable

import numpy as np

from . import pngio
from .errors import CardexError, DegenerateBox, NoCardFound, PortError
from .imaging import (
    CANNY_BLUR_SIGMA_DEFAULT,
    CANNY_BLUR_SIZE_DEFAULT,
    CANNY_HIGH_DEFAULT,
    CANNY_LOW_DEFAULT,
    canny_edges,
    crop,
    gaussian_blur,
    solve_homography,
    to_grayscale,
    warp_perspective,
)
from .metrics import load_detection_dump
from .textfix import (
    Lexicon,
    SubstitutionTable,
    apply_substitutions,
    correct_token,
    normalize_date,
    standardize_gender,
    default_district_lexicon,
    default_gender_lexicon,
    default_substitutions,
)
from .types import (
    CategorySchema,
    DEFAULT_BACK_SCHEMA,
    DEFAULT_FRONT_SCHEMA,
    Detection,
    ExtractionResult,
    FieldValue,
    ImageBuffer,
    clamp_box,
    norm_to_abs,
)
from .errors import DateError
from . import accel

HULL_CAP = 64
MIN_QUAD_AREA_FRACTION = 1e-6


@runtime_checkable
class DetectorPort(Protocol):
    concurrent_safe: bool

    def detect(self, img: ImageBuffer, side: str) -> list[Detection]: ...


@runtime_checkable
class OcrPort(Protocol):
    concurrent_safe: bool

    def recognize(self, crop_img: ImageBuffer, language: str, category: str) -> tuple[str, float]: ...


class FixtureDetector:
    """Replays detections from a JSON-lines dump, keyed by image name."""

    concurrent_safe = True

    def __init__(self, dump_text: str, key: str):
        records = load_detection_dump(dump_text)
        if key not in records:
            raise PortError(f"no detections for image key {key!r} in dump")
        self._detections, _ = records[key]

    def detect(self, img: ImageBuffer, side: str) -> list[Detection]:
        return list(self._detections)


class StubOcr:
    """Returns canned text per field category; for tests and fixture mode."""

    concurrent_safe = True

    def __init__(self, by_category: dict[str, tuple[str, float]]):
        self._by_category = dict(by_category)

    def recognize(self, crop_img: ImageBuffer, language: str, category: str):
        return self._by_category.get(category, ("", 0.0))


class ExternalOcrClient:
    """Invokes a command template with {image} and {lang} placeholders.

    The command must print the recognized UTF-8 text on stdout and exit 0;
    an optional trailing tab-separated float is taken as the confidence
    (default 1.0).
    """

    concurrent_safe = True

    def __init__(self, command_template: str, timeout: float = 60.0):
        self.command_template = command_template
        self.timeout = timeout

    def recognize(self, crop_img: ImageBuffer, language: str, category: str):
        with tempfile.NamedTemporaryFile(suffix=".png", delete=False) as tmp:
            tmp_path = Path(tmp.name)
        try:
            pngio.save_png(crop_img, tmp_path)
            argv = [
                part.replace("{image}", str(tmp_path)).replace("{lang}", language)
                for part in shlex.split(self.command_template)
            ]
            try:
                proc = subprocess.run(
                    argv, capture_output=True, timeout=self.timeout, check=False
                )
            except (OSError, subprocess.TimeoutExpired) as exc:
                raise PortError(f"OCR command failed to run: {exc}") from exc
            if proc.returncode != 0:
                raise PortError(
                    f"OCR command exited {proc.returncode}: {proc.stderr.decode(errors='replace')[:200]}"
                )
            out = proc.stdout.decode("utf-8").rstrip("\n")
            text, confidence = out, 1.0
            if "\t" in out:
                head, tail = out.rsplit("\t", 1)
                try:
                    confidence = min(max(float(tail), 0.0), 1.0)
                    text = head
                except ValueError:
                    pass
            return text, confidence
        finally:
            tmp_path.unlink(missing_ok=True)


@dataclass(frozen=True)
class PipelineConfig:
    schema_front: CategorySchema = DEFAULT_FRONT_SCHEMA
    schema_back: CategorySchema = DEFAULT_BACK_SCHEMA
    lexicons: dict[str, Lexicon] = dc_field(default_factory=dict)
    substitutions: SubstitutionTable = dc_field(default_factory=lambda: SubstitutionTable(()))
    date_fields: frozenset[str] = frozenset()
    canny_low: float = CANNY_LOW_DEFAULT
    canny_high: float = CANNY_HIGH_DEFAULT
    canny_blur_size: int = CANNY_BLUR_SIZE_DEFAULT
    canny_blur_sigma: float = CANNY_BLUR_SIGMA_DEFAULT
    ocr_language: str = "nep"
    min_detection_confidence: float = 0.25
    rect_w: int = 1280
    rect_h: int = 800

    def __post_init__(self):
        known = set(self.schema_front.names) | set(self.schema_back.names)
        for field_name in self.lexicons:
            if field_name not in known:
                raise CardexError(f"lexicon field {field_name!r} not in any schema")

    @classmethod
    def default(cls, **overrides) -> "PipelineConfig":
        base = dict(
            lexicons={
                "district": default_district_lexicon(),
                "gender": default_gender_lexicon(),
            },
            substitutions=default_substitutions(),
            date_fields=frozenset({"date_of_birth", "date_of_issue"}),
        )
        base.update(overrides)
        return cls(**base)

    def schema_for(self, side: str) -> CategorySchema:
        return self.schema_front if side == "front" else self.schema_back


@dataclass(frozen=True)
class SideFailure:
    side: str
    code: str
    message: str


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew monotone chain; returns hull vertices in counter-clockwise
    order (screen coordinates)."""
    pts = np.unique(points, axis=0)
    if pts.shape[0] < 3:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=np.float64)


def _order_corners(quad: np.ndarray) -> np.ndarray:
    """Order by angle around the centroid, starting at the top-left corner,
    yielding (tl, tr, br, bl)."""
    center = quad.mean(axis=0)
    angles = np.arctan2(quad[:, 1] - center[1], quad[:, 0] - center[0])
    ordered = quad[np.argsort(angles)]
    start = int(np.argmin(ordered.sum(axis=1)))
    return np.roll(ordered, -start, axis=0)


def detect_card_quad(
    img: ImageBuffer,
    low: float = CANNY_LOW_DEFAULT,
    high: float = CANNY_HIGH_DEFAULT,
    blur_size: int = CANNY_BLUR_SIZE_DEFAULT,
    blur_sigma: float = CANNY_BLUR_SIGMA_DEFAULT,
) -> np.ndarray:
    """Locate the card outline: Canny edges -> convex hull -> the 4 hull
    vertices spanning the largest quadrilateral. Returns corners ordered
    (tl, tr, br, bl)."""
    edge_map = canny_edges(img, low, high, blur_size, blur_sigma)
    ys, xs = np.nonzero(edge_map.edges)
    if xs.size < 4:
        raise NoCardFound("too few edge pixels to form a quadrilateral")
    hull = _convex_hull(np.column_stack([xs, ys]).astype(np.float64))
    if hull.shape[0] < 4:
        raise NoCardFound("convex hull has fewer than 4 vertices")
    if hull.shape[0] > HULL_CAP:
        idx = np.linspace(0, hull.shape[0] - 1, HULL_CAP).astype(np.int64)
        hull = hull[np.unique(idx)]
    area, i, j, k, l = accel.best_quad(np.ascontiguousarray(hull))
    if area < MIN_QUAD_AREA_FRACTION * img.width * img.height:
        raise NoCardFound("largest candidate quadrilateral has near-zero area")
    return _order_corners(hull[[i, j, k, l]])


def rectify_card(
    img: ImageBuffer,
    out_w: int,
    out_h: int,
    low: float = CANNY_LOW_DEFAULT,
    high: float = CANNY_HIGH_DEFAULT,
    blur_size: int = CANNY_BLUR_SIZE_DEFAULT,
    blur_sigma: float = CANNY_BLUR_SIGMA_DEFAULT,
) -> ImageBuffer:
    """Warp the detected card quadrilateral onto an upright out_w x out_h
    rectangle."""
    quad = detect_card_quad(img, low, high, blur_size, blur_sigma)
    dst = np.array(
        [[0.0, 0.0], [out_w - 1.0, 0.0], [out_w - 1.0, out_h - 1.0], [0.0, out_h - 1.0]]
    )
    h = solve_homography(quad, dst)
    return warp_perspective(img, h, out_w, out_h)


def preprocess_crop(crop_img: ImageBuffer) -> ImageBuffer:
    """Grayscale then 3x3 sigma=1.0 Gaussian blur, for the OCR port."""
    return gaussian_blur(to_grayscale(crop_img), 3, 1.0)


def _correct_field(name: str, text: str, cfg: PipelineConfig):
    """Returns (corrected_text, applied, warning_or_None)."""
    if name in cfg.date_fields:
        try:
            fixed = normalize_date(text)
            return fixed, fixed != text, None
        except DateError as exc:
            return text, False, f"field '{name}': {exc}"
    lex = cfg.lexicons.get(name)
    if lex is not None:
        outcome = standardize_gender(text, lex) if lex.mapping else correct_token(text, lex)
        return outcome.value, outcome.applied, None
    return text, False, None


def extract_side(
    img: ImageBuffer,
    side: str,
    detector: DetectorPort,
    ocr: OcrPort,
    cfg: PipelineConfig,
) -> ExtractionResult:
    """Rectify, detect, OCR the best crop per field, and repair the text."""
    schema = cfg.schema_for(side)
    rectified = rectify_card(
        img, cfg.rect_w, cfg.rect_h,
        cfg.canny_low, cfg.canny_high, cfg.canny_blur_size, cfg.canny_blur_sigma,
    )
    try:
        detections = detector.detect(rectified, side)
    except CardexError:
        raise
    except Exception as exc:
        raise PortError(f"detector port failed: {exc}") from exc

    best: dict[int, Detection] = {}
    for det in detections:
        if det.confidence < cfg.min_detection_confidence:
            continue
        if not schema.valid_category(det.category):
            continue
        cur = best.get(det.category)
        if cur is None or det.confidence > cur.confidence:
            best[det.category] = det

    fields: dict[str, FieldValue] = {}
    warnings: list[str] = []
    for cat, name in enumerate(schema.names):
        det = best.get(cat)
        if det is None:
            warnings.append(f"no detection for field '{name}'")
            continue
        try:
            abs_box = norm_to_abs(clamp_box(det.box), rectified.width, rectified.height)
            field_crop = preprocess_crop(crop(rectified, abs_box))
        except DegenerateBox as exc:
            warnings.append(f"field '{name}': degenerate box ({exc})")
            continue
        try:
            raw_text, confidence = ocr.recognize(field_crop, cfg.ocr_language, name)
        except CardexError:
            raise
        except Exception as exc:
            raise PortError(f"OCR port failed on field '{name}': {exc}") from exc

        substituted = apply_substitutions(raw_text, cfg.substitutions, scope=name)
        corrected, applied, warning = _correct_field(name, substituted, cfg)
        if warning:
            warnings.append(warning)
        applied = applied or corrected != raw_text
        fields[name] = FieldValue(
            raw_text=raw_text,
            corrected_text=corrected,
            confidence=min(max(confidence, 0.0), 1.0),
            correction_applied=applied,
        )
    return ExtractionResult(side=side, fields=fields, warnings=tuple(warnings))


def extract_document(
    front: ImageBuffer,
    back: ImageBuffer,
    front_detector: DetectorPort,
    back_detector: DetectorPort,
    ocr: OcrPort,
    cfg: PipelineConfig,
):
    """Extract both sides independently; a failure on one side is reported
    as a SideFailure without aborting the other."""
    results = []
    for img, side, detector in (
        (front, "front", front_detector),
        (back, "back", back_detector),
    ):
        try:
            results.append(extract_side(img, side, detector, ocr, cfg))
        except NoCardFound as exc:
            results.append(SideFailure(side, "no_card_found", str(exc)))
        except PortError as exc:
            results.append(SideFailure(side, "port_error", str(exc)))
    return results[0], results[1]
