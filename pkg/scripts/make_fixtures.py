"""Regenerate the synthetic test fixtures and golden files.

Renders two-sided synthetic card photos (perspective-skewed card on a black
background), the matching detection dump, the stub OCR assets, and the
golden extraction outputs produced through the public pipeline.

Run from the repo root:  python3 scripts/make_fixtures.py
"""

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from cardex.extraction import (  # noqa: E402
    FixtureDetector,
    PipelineConfig,
    StubOcr,
    extract_document,
)
from cardex.imaging import solve_homography, warp_perspective  # noqa: E402
from cardex.pngio import save_png  # noqa: E402
from cardex.types import ImageBuffer  # noqa: E402

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"

RECT_W, RECT_H = 320, 200
CANVAS_W, CANVAS_H = 400, 260

# field boxes in rectified-card pixel coordinates (x1, y1, x2, y2); widths
# are all distinct so the external stub OCR can key on crop size
FRONT_BOXES = {
    "name": (20, 20, 120, 40),
    "date_of_birth": (20, 50, 130, 70),
    "citizenship_number": (20, 80, 140, 100),
    "district": (20, 110, 110, 130),
    "gender": (20, 140, 100, 160),
}
BACK_BOXES = {
    "issuing_officer": (20, 30, 125, 55),
    "date_of_issue": (20, 70, 115, 95),
}
FRONT_CONF = {
    "name": 0.92,
    "date_of_birth": 0.88,
    "citizenship_number": 0.90,
    "district": 0.85,
    "gender": 0.80,
}
BACK_CONF = {"issuing_officer": 0.87, "date_of_issue": 0.90}

OCR_TEXTS = {
    "name": ["राम बहादुर थापा", 0.92],
    "date_of_birth": ["२०४५/०३/१२", 0.88],
    "citizenship_number": ["12-O1-75-O1234", 0.90],
    "district": ["Kaskl", 0.85],
    "gender": ["पुरूष", 0.80],
    "issuing_officer": ["सीता कुमारी श्रेष्ठ", 0.87],
    "date_of_issue": ["२०६५-०१-१५", 0.90],
}

FRONT_QUAD = [(40.0, 30.0), (360.0, 40.0), (350.0, 230.0), (50.0, 220.0)]
BACK_QUAD = [(35.0, 25.0), (365.0, 35.0), (355.0, 235.0), (45.0, 225.0)]


def render_card_content(boxes) -> ImageBuffer:
    content = np.full((RECT_H, RECT_W, 1), 230, np.uint8)
    for x1, y1, x2, y2 in boxes.values():
        content[y1:y2, x1:x2, 0] = 200
    return ImageBuffer(content)


def render_card_photo(content: ImageBuffer, quad) -> ImageBuffer:
    src = np.array(
        [[0.0, 0.0], [RECT_W - 1.0, 0.0], [RECT_W - 1.0, RECT_H - 1.0], [0.0, RECT_H - 1.0]]
    )
    h = solve_homography(src, np.array(quad))
    return warp_perspective(content, h, CANVAS_W, CANVAS_H)


def norm_box(px_box):
    x1, y1, x2, y2 = px_box
    return [
        (x1 + x2) / 2.0 / RECT_W,
        (y1 + y2) / 2.0 / RECT_H,
        (x2 - x1) / RECT_W,
        (y2 - y1) / RECT_H,
    ]


def dets_record(image_key, boxes, conf, names):
    detections = [
        {"category": names.index(field), "confidence": conf[field], "box": norm_box(box)}
        for field, box in boxes.items()
    ]
    truths = [
        {"category": names.index(field), "box": norm_box(box)} for field, box in boxes.items()
    ]
    return {"image": image_key, "detections": detections, "truths": truths}


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    cfg = PipelineConfig.default(rect_w=RECT_W, rect_h=RECT_H)
    front_names = list(cfg.schema_front.names)
    back_names = list(cfg.schema_back.names)

    front_photo = render_card_photo(render_card_content(FRONT_BOXES), FRONT_QUAD)
    back_photo = render_card_photo(render_card_content(BACK_BOXES), BACK_QUAD)
    save_png(front_photo, FIXTURES / "front.png")
    save_png(back_photo, FIXTURES / "back.png")
    save_png(ImageBuffer(np.zeros((CANVAS_H, CANVAS_W, 1), np.uint8)), FIXTURES / "blank.png")

    records = []
    for key in ("front", "front.png"):
        records.append(dets_record(key, FRONT_BOXES, FRONT_CONF, front_names))
    for key in ("back", "back.png"):
        records.append(dets_record(key, BACK_BOXES, BACK_CONF, back_names))
    dump_text = "\n".join(json.dumps(r, ensure_ascii=False) for r in records) + "\n"
    (FIXTURES / "dets.jsonl").write_text(dump_text, encoding="utf-8")

    (FIXTURES / "stub_ocr.json").write_text(
        json.dumps(OCR_TEXTS, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )

    # external stub OCR keys on the crop size it receives
    size_map = {}
    for boxes in (FRONT_BOXES, BACK_BOXES):
        for field, (x1, y1, x2, y2) in boxes.items():
            text, conf = OCR_TEXTS[field]
            size_map[f"{x2 - x1}x{y2 - y1}"] = [text, conf]
    (FIXTURES / "stub_sizes.json").write_text(
        json.dumps(size_map, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )

    # golden extraction results through the public pipeline
    stub = StubOcr({k: (v[0], float(v[1])) for k, v in OCR_TEXTS.items()})
    front_res, back_res = extract_document(
        front_photo,
        back_photo,
        FixtureDetector(dump_text, "front"),
        FixtureDetector(dump_text, "back"),
        stub,
        cfg,
    )
    golden = {"front": front_res.to_dict(), "back": back_res.to_dict()}
    (FIXTURES / "golden_extract.json").write_text(
        json.dumps(golden, indent=2, ensure_ascii=False, sort_keys=True) + "\n", encoding="utf-8"
    )
    print("fixtures written to", FIXTURES)
    print(json.dumps(golden, ensure_ascii=False, indent=2))


if __name__ == "__main__":
    main()
