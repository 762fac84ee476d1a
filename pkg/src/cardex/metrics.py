"""Detection evaluation: IoU, greedy matching, precision/recall/F1/support,
confusion matrix, PR and F1-confidence curves, AP and mAP.

Conventions (frozen so goldens stay stable):
  * matching is greedy in descending confidence, gated on category, at a
    configurable IoU threshold (default 0.5)
  * AP uses all-points interpolation with a monotone precision envelope
  * tn is fixed at 0: accuracy is exposed but degenerate for detection
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .types import AbsBox, CategorySchema, Detection, GroundTruth, NormBox, norm_to_abs


@dataclass(frozen=True)
class BinaryCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("counts must be non-negative")


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[tuple[int, int, float], ...]  # (det index, truth index, iou)
    unmatched_detections: tuple[int, ...]
    unmatched_truths: tuple[int, ...]


@dataclass(frozen=True)
class CurvePoint:
    threshold: float
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvalReport:
    per_category: dict[int, dict]  # {ap, precision, recall, f1, support}
    map50: float
    confusion: np.ndarray  # (K+1, K+1), background last
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "per_category": {str(k): v for k, v in self.per_category.items()},
            "map50": self.map50,
            "confusion": self.confusion.tolist(),
            "warnings": list(self.warnings),
        }


# normalized boxes are compared on a common unit canvas
_UNIT = 10000


def _to_abs(box: NormBox) -> AbsBox:
    return norm_to_abs(box, _UNIT, _UNIT)


def iou(a: AbsBox, b: AbsBox) -> float:
    ix1 = max(a.x1, b.x1)
    iy1 = max(a.y1, b.y1)
    ix2 = min(a.x2, b.x2)
    iy2 = min(a.y2, b.y2)
    iw = max(ix2 - ix1, 0.0)
    ih = max(iy2 - iy1, 0.0)
    inter = iw * ih
    union = a.area + b.area - inter
    return inter / union if union > 0.0 else 0.0


def match_detections(
    dets: list[Detection], truths: list[GroundTruth], iou_thresh: float = 0.5
) -> MatchResult:
    """Greedy matching: by descending confidence, each detection claims the
    highest-IoU unclaimed same-category truth with IoU >= iou_thresh."""
    if not (0.0 < iou_thresh <= 1.0):
        raise ValueError(f"iou_thresh must be in (0, 1], got {iou_thresh}")
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].confidence, i))
    truth_boxes = [_to_abs(t.box) for t in truths]
    claimed = [False] * len(truths)
    pairs = []
    unmatched_dets = []
    for di in order:
        det = dets[di]
        det_box = _to_abs(det.box)
        best_iou = 0.0
        best_ti = -1
        for ti, truth in enumerate(truths):
            if claimed[ti] or truth.category != det.category:
                continue
            ov = iou(det_box, truth_boxes[ti])
            if ov >= iou_thresh and ov > best_iou:
                best_iou = ov
                best_ti = ti
        if best_ti >= 0:
            claimed[best_ti] = True
            pairs.append((di, best_ti, best_iou))
        else:
            unmatched_dets.append(di)
    unmatched_truths = tuple(ti for ti, c in enumerate(claimed) if not c)
    return MatchResult(tuple(pairs), tuple(unmatched_dets), unmatched_truths)


def binary_counts(match: MatchResult, n_dets: int, n_truths: int) -> BinaryCounts:
    tp = len(match.pairs)
    return BinaryCounts(tp=tp, fp=n_dets - tp, fn=n_truths - tp, tn=0)


def precision(c: BinaryCounts) -> float:
    denom = c.tp + c.fp
    return c.tp / denom if denom else 0.0


def recall(c: BinaryCounts) -> float:
    denom = c.tp + c.fn
    return c.tp / denom if denom else 0.0


def f1(c: BinaryCounts) -> float:
    p = precision(c)
    r = recall(c)
    return 2.0 * p * r / (p + r) if (p + r) > 0.0 else 0.0


def accuracy(c: BinaryCounts) -> float:
    denom = c.tp + c.tn + c.fp + c.fn
    return (c.tp + c.tn) / denom if denom else 0.0


def support(truths: list[GroundTruth], schema: CategorySchema) -> dict[int, int]:
    counts = {cat: 0 for cat in range(len(schema))}
    for t in truths:
        counts[t.category] = counts.get(t.category, 0) + 1
    return counts


def pr_f1_curves(
    dets: list[Detection],
    truths: list[GroundTruth],
    iou_thresh: float,
    thresholds: list[float],
) -> list[CurvePoint]:
    """Precision/recall/F1 at each confidence cutoff (detections with
    confidence >= t are kept)."""
    if list(thresholds) != sorted(thresholds):
        raise ValueError("thresholds must be sorted ascending")
    points = []
    for t in thresholds:
        kept = [d for d in dets if d.confidence >= t]
        counts = binary_counts(match_detections(kept, truths, iou_thresh), len(kept), len(truths))
        points.append(CurvePoint(t, precision(counts), recall(counts), f1(counts)))
    return points


def average_precision(
    dets: list[Detection], truths: list[GroundTruth], iou_thresh: float = 0.5
):
    """All-points-interpolated AP for a single category.

    Returns (ap, warning_or_None); AP is 0 with a warning when there are no
    ground truths.
    """
    if not truths:
        return 0.0, "no ground truths: AP defined as 0"
    match = match_detections(dets, truths, iou_thresh)
    matched = {di for di, _, _ in match.pairs}
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].confidence, i))
    tp_flags = np.array([1.0 if di in matched else 0.0 for di in order])
    if tp_flags.size == 0:
        return 0.0, None
    return _ap_from_flags(tp_flags, len(truths)), None


def _ap_from_flags(tp_flags: np.ndarray, n_truths: int) -> float:
    """AP from match flags ordered by descending confidence (all-points
    interpolation with a monotone precision envelope)."""
    tp_cum = np.cumsum(tp_flags)
    fp_cum = np.cumsum(1.0 - tp_flags)
    recalls = tp_cum / n_truths
    precisions = tp_cum / (tp_cum + fp_cum)
    r = np.concatenate(([0.0], recalls))
    p = np.concatenate(([1.0], precisions))
    for i in range(p.size - 2, -1, -1):
        p[i] = max(p[i], p[i + 1])
    return float(np.sum((r[1:] - r[:-1]) * p[1:]))


def mean_average_precision(
    dets: list[Detection],
    truths: list[GroundTruth],
    schema: CategorySchema,
    iou_thresh: float = 0.5,
) -> EvalReport:
    """Per-category AP/precision/recall/F1/support plus confusion matrix.

    map50 is the unweighted mean of AP over categories with at least one
    ground truth. The confusion matrix is (K+1)x(K+1) with rows = actual
    category and columns = predicted; the last row/column is background
    (unmatched detections / unmatched truths).
    """
    k = len(schema)
    sup = support(truths, schema)
    per_category = {}
    warnings = []
    aps = []
    for cat in range(k):
        cat_dets = [d for d in dets if d.category == cat]
        cat_truths = [t for t in truths if t.category == cat]
        ap, warning = average_precision(cat_dets, cat_truths, iou_thresh)
        if warning:
            warnings.append(f"category {cat} ({schema.names[cat]}): {warning}")
        else:
            aps.append(ap)
        counts = binary_counts(
            match_detections(cat_dets, cat_truths, iou_thresh), len(cat_dets), len(cat_truths)
        )
        per_category[cat] = {
            "name": schema.names[cat],
            "ap": ap,
            "precision": precision(counts),
            "recall": recall(counts),
            "f1": f1(counts),
            "support": sup[cat],
        }
    map50 = float(np.mean(aps)) if aps else 0.0

    confusion = np.zeros((k + 1, k + 1), dtype=np.int64)
    match = match_detections(dets, truths, iou_thresh)
    for di, ti, _ in match.pairs:
        confusion[truths[ti].category, dets[di].category] += 1
    for di in match.unmatched_detections:
        confusion[k, dets[di].category] += 1
    for ti in match.unmatched_truths:
        confusion[truths[ti].category, k] += 1
    return EvalReport(per_category, map50, confusion, tuple(warnings))


def evaluate_images(
    records: dict,
    schema: CategorySchema,
    iou_thresh: float = 0.5,
    thresholds: list[float] | None = None,
):
    """Aggregate evaluation over a multi-image detection dump.

    Matching runs per image; AP ranks detections globally by confidence
    using the per-image match flags. Returns (EvalReport, curve points).
    """
    k = len(schema)
    per_image = {
        image: match_detections(dets, truths, iou_thresh)
        for image, (dets, truths) in records.items()
    }

    per_category = {}
    warnings = []
    aps = []
    confusion = np.zeros((k + 1, k + 1), dtype=np.int64)
    for image, (dets, truths) in records.items():
        match = per_image[image]
        for di, ti, _ in match.pairs:
            confusion[truths[ti].category, dets[di].category] += 1
        for di in match.unmatched_detections:
            confusion[k, dets[di].category] += 1
        for ti in match.unmatched_truths:
            confusion[truths[ti].category, k] += 1

    for cat in range(k):
        flagged = []  # (confidence, matched?) across all images
        n_truths = 0
        tp = fp = fn = 0
        for image, (dets, truths) in records.items():
            match = match_detections(
                [d for d in dets if d.category == cat],
                [t for t in truths if t.category == cat],
                iou_thresh,
            )
            cat_dets = [d for d in dets if d.category == cat]
            cat_truths = [t for t in truths if t.category == cat]
            matched = {di for di, _, _ in match.pairs}
            for di, det in enumerate(cat_dets):
                flagged.append((det.confidence, di in matched))
            n_truths += len(cat_truths)
            tp += len(match.pairs)
            fp += len(cat_dets) - len(match.pairs)
            fn += len(cat_truths) - len(match.pairs)
        if n_truths == 0:
            ap = 0.0
            warnings.append(f"category {cat} ({schema.names[cat]}): no ground truths: AP defined as 0")
        else:
            flagged.sort(key=lambda x: -x[0])
            ap = _ap_from_flags(np.array([1.0 if f else 0.0 for _, f in flagged]), n_truths)
            aps.append(ap)
        counts = BinaryCounts(tp=tp, fp=fp, fn=fn, tn=0)
        per_category[cat] = {
            "name": schema.names[cat],
            "ap": ap,
            "precision": precision(counts),
            "recall": recall(counts),
            "f1": f1(counts),
            "support": n_truths,
        }
    map50 = float(np.mean(aps)) if aps else 0.0
    report = EvalReport(per_category, map50, confusion, tuple(warnings))

    if thresholds is None:
        thresholds = [i / 100.0 for i in range(0, 101, 5)]
    points = []
    for t in thresholds:
        tp = fp = fn = 0
        for image, (dets, truths) in records.items():
            kept = [d for d in dets if d.confidence >= t]
            match = match_detections(kept, truths, iou_thresh)
            tp += len(match.pairs)
            fp += len(kept) - len(match.pairs)
            fn += len(truths) - len(match.pairs)
        counts = BinaryCounts(tp=tp, fp=fp, fn=fn, tn=0)
        points.append(CurvePoint(t, precision(counts), recall(counts), f1(counts)))
    return report, points


def parse_dump_line(line: str, lineno: int):
    """Parse one JSON-lines detection dump record.

    Format: {"image": str, "detections": [{"category", "confidence",
    "box": [cx, cy, w, h]}], "truths": [{"category", "box"}]}.
    """
    try:
        obj = json.loads(line)
        image = obj["image"]
        dets = [
            Detection(int(d["category"]), float(d["confidence"]), NormBox(*d["box"]))
            for d in obj.get("detections", [])
        ]
        truths = [
            GroundTruth(int(t["category"]), NormBox(*t["box"]))
            for t in obj.get("truths", [])
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad detection dump record: {exc}", lineno) from exc
    return image, dets, truths


def load_detection_dump(text: str):
    """Parse a whole dump; returns {image: (detections, truths)}."""
    records = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        image, dets, truths = parse_dump_line(line, lineno)
        records[image] = (dets, truths)
    return records


def curves_to_csv(points: list[CurvePoint]) -> str:
    lines = ["threshold,precision,recall,f1"]
    lines += [f"{p.threshold:.6f},{p.precision:.6f},{p.recall:.6f},{p.f1:.6f}" for p in points]
    return "\n".join(lines) + "\n"
