"""Operator command line: preprocess, split, augment, evaluate, extract,
kernel-check, serve.

Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 domain object
not found (e.g. no card in the image).
"""

from __future__ import annotations

import hashlib
import json
import shutil
import sys
from pathlib import Path

import click

from . import __version__
from .annotations import SplitSpec, split_dataset
from .errors import CardexError, NoCardFound, ParseError
from .extraction import (
    ExternalOcrClient,
    FixtureDetector,
    PipelineConfig,
    SideFailure,
    extract_document,
)
from .imaging import AugmentSpec, augment as augment_op, canny_edges, gaussian_blur, to_grayscale
from .metrics import curves_to_csv, evaluate_images, load_detection_dump
from .pngio import load_image, save_png
from .types import ImageBuffer

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


@click.group()
@click.version_option(__version__)
def main():
    """Identity-card extraction toolkit."""


def _fail(message: str, code: int = 1):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@main.command()
@click.option("--input", "input_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--ratio", required=True, type=float, help="train fraction, in (0, 1)")
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--output", "output_dir", required=True, type=click.Path(file_okay=False))
@click.option("--dedupe/--no-dedupe", default=False, help="drop byte-identical duplicate images")
def split(input_dir, ratio, seed, output_dir, dedupe):
    """Stratified train/val split of an image (+label) tree.

    Strata are the immediate source subfolders; images/ and labels/
    subtrees are mirrored under train/ and val/ in the output.
    """
    if not (0.0 < ratio < 1.0):
        raise click.BadParameter("ratio must be in (0, 1)", param_hint="--ratio")
    input_dir = Path(input_dir)
    items = sorted(
        p for p in input_dir.rglob("*") if p.suffix.lower() in IMAGE_SUFFIXES and p.is_file()
    )
    if not items:
        _fail(f"no images under {input_dir}")
    if dedupe:
        seen: dict[str, Path] = {}
        kept = []
        for p in items:
            digest = hashlib.sha256(p.read_bytes()).hexdigest()
            if digest in seen:
                click.echo(f"dropping duplicate {p} (same bytes as {seen[digest]})")
            else:
                seen[digest] = p
                kept.append(p)
        items = kept

    spec = SplitSpec(seed=seed, train_ratio=ratio)
    train, val, warnings = split_dataset(
        items, spec, stratum_of=lambda p: str(p.parent.relative_to(input_dir))
    )
    for warning in warnings:
        click.echo(f"warning: {warning}", err=True)

    output_dir = Path(output_dir)
    try:
        for subset, name in ((train, "train"), (val, "val")):
            for img_path in subset:
                rel = img_path.relative_to(input_dir)
                dst = output_dir / name / "images" / rel
                dst.parent.mkdir(parents=True, exist_ok=True)
                shutil.copy2(img_path, dst)
                label = img_path.with_suffix(".txt")
                if label.exists():
                    ldst = output_dir / name / "labels" / rel.with_suffix(".txt")
                    ldst.parent.mkdir(parents=True, exist_ok=True)
                    shutil.copy2(label, ldst)
    except OSError as exc:
        _fail(f"I/O failure: {exc}")

    strata = sorted({str(p.parent.relative_to(input_dir)) for p in items})
    for stratum in strata:
        n_train = sum(1 for p in train if str(p.parent.relative_to(input_dir)) == stratum)
        n_val = sum(1 for p in val if str(p.parent.relative_to(input_dir)) == stratum)
        click.echo(f"stratum {stratum or '.'}: train={n_train} val={n_val}")
    click.echo(f"train={len(train)} val={len(val)}")


@main.command()
@click.option("--dets", "dets_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--iou", "iou_thresh", default=0.5, type=float, show_default=True)
@click.option("--out", "report_path", required=True, type=click.Path(dir_okay=False))
@click.option("--curves", "curves_path", type=click.Path(dir_okay=False))
@click.option("--names", help="comma-separated category names (default: c0..cK inferred)")
def evaluate(dets_path, iou_thresh, report_path, curves_path, names):
    """Evaluate a JSON-lines detection dump: AP/mAP, PR and F1 curves."""
    from .types import CategorySchema

    try:
        records = load_detection_dump(Path(dets_path).read_text(encoding="utf-8"))
    except ParseError as exc:
        _fail(str(exc))
    if not records:
        _fail("detection dump is empty")
    if names:
        schema = CategorySchema("front", tuple(n.strip() for n in names.split(",")))
    else:
        max_cat = max(
            [d.category for dets, truths in records.values() for d in dets]
            + [t.category for dets, truths in records.values() for t in truths],
            default=0,
        )
        schema = CategorySchema("front", tuple(f"c{i}" for i in range(max_cat + 1)))
    report, points = evaluate_images(records, schema, iou_thresh)
    Path(report_path).write_text(
        json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    if curves_path:
        Path(curves_path).write_text(curves_to_csv(points), encoding="utf-8")
    click.echo(f"map50={report.map50:.6f}")
    for warning in report.warnings:
        click.echo(f"warning: {warning}", err=True)


@main.command()
@click.option("--front", "front_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--back", "back_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--dets", "dets_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--ocr-cmd", required=True, help="OCR command template with {image} and {lang}")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--rect-w", default=1280, type=int, show_default=True)
@click.option("--rect-h", default=800, type=int, show_default=True)
@click.option("--min-conf", default=0.25, type=float, show_default=True)
@click.option("--lang", default="nep", show_default=True)
def extract(front_path, back_path, dets_path, ocr_cmd, out_path, rect_w, rect_h, min_conf, lang):
    """Extract both card sides using a fixture detection dump and an
    external OCR command."""
    dump_text = Path(dets_path).read_text(encoding="utf-8")

    def detector_for(path: str):
        for key in (path, Path(path).name):
            try:
                return FixtureDetector(dump_text, key)
            except CardexError:
                continue
        _fail(f"no detections for {path} in {dets_path}")

    cfg = PipelineConfig.default(
        rect_w=rect_w, rect_h=rect_h, min_detection_confidence=min_conf, ocr_language=lang
    )
    try:
        front_res, back_res = extract_document(
            load_image(front_path),
            load_image(back_path),
            detector_for(front_path),
            detector_for(back_path),
            ExternalOcrClient(ocr_cmd),
            cfg,
        )
    except CardexError as exc:
        _fail(str(exc))
    for res in (front_res, back_res):
        if isinstance(res, SideFailure):
            if res.code == "no_card_found":
                _fail(f"no card found on {res.side} side: {res.message}", code=3)
            _fail(f"{res.side} side failed: {res.message}")
    doc = {"front": front_res.to_dict(), "back": back_res.to_dict()}
    Path(out_path).write_text(
        json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=True) + "\n", encoding="utf-8"
    )
    click.echo(f"wrote {out_path}")


@main.command("kernel-check")
def kernel_check():
    """Run the gradient and property suites for the loss/optimizer kernels."""
    from .kernelcheck import run_all

    results = run_all()
    width = max(len(name) for name, _ in results)
    ok = True
    for name, passed in results:
        click.echo(f"{name:<{width}}  {'PASS' if passed else 'FAIL'}")
        ok &= passed
    sys.exit(0 if ok else 1)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--op", required=True, type=click.Choice(["grayscale", "blur", "canny", "rectify"]))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--size", default=5, type=int, show_default=True, help="blur kernel size")
@click.option("--sigma", default=1.4, type=float, show_default=True)
@click.option("--low", default=50.0, type=float, show_default=True)
@click.option("--high", default=150.0, type=float, show_default=True)
@click.option("--rect-w", default=1280, type=int, show_default=True)
@click.option("--rect-h", default=800, type=int, show_default=True)
def preprocess(input_path, op, out_path, size, sigma, low, high, rect_w, rect_h):
    """Apply one preprocessing operator to an image and write a PNG."""
    import numpy as np

    from .extraction import rectify_card

    img = load_image(input_path)
    try:
        if op == "grayscale":
            out = to_grayscale(img)
        elif op == "blur":
            out = gaussian_blur(to_grayscale(img), size, sigma)
        elif op == "canny":
            edge_map = canny_edges(img, low, high, size, sigma)
            out = ImageBuffer((edge_map.edges.astype(np.uint8) * 255)[:, :, np.newaxis])
        else:
            out = rectify_card(img, rect_w, rect_h, low, high, size, sigma)
    except NoCardFound as exc:
        _fail(str(exc), code=3)
    except CardexError as exc:
        _fail(str(exc))
    save_png(out, out_path)
    click.echo(f"wrote {out_path}")


@main.command("augment")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--labels", "labels_path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--op",
    required=True,
    type=click.Choice(["flip_h", "flip_v", "rotate90_cw", "brightness_contrast", "scale"]),
)
@click.option("--alpha", default=1.0, type=float, show_default=True, help="contrast gain")
@click.option("--beta", default=0.0, type=float, show_default=True, help="brightness bias")
@click.option("--factor", default=1.0, type=float, show_default=True, help="scale factor")
@click.option("--out-image", required=True, type=click.Path(dir_okay=False))
@click.option("--out-labels", type=click.Path(dir_okay=False))
def augment_cmd(input_path, labels_path, op, alpha, beta, factor, out_image, out_labels):
    """Apply one augmentation to an image and its YOLO label file."""
    from .annotations import parse_yolo_label, serialize_yolo_label
    from .types import CategorySchema

    img = load_image(input_path)
    entries = []
    if labels_path:
        # labels are not schema-gated here; accept any non-negative category
        schema = CategorySchema("front", tuple(f"c{i}" for i in range(1000)))
        try:
            entries = parse_yolo_label(Path(labels_path).read_text(encoding="utf-8"), schema)
        except ParseError as exc:
            _fail(str(exc))
    try:
        spec = AugmentSpec(op=op, alpha=alpha, beta=beta, factor=factor)
        out, boxes = augment_op(img, [b for _, b in entries], spec)
    except CardexError as exc:
        _fail(str(exc))
    save_png(out, out_image)
    if out_labels:
        cats = [c for c, _ in entries]
        Path(out_labels).write_text(
            serialize_yolo_label(list(zip(cats, boxes))) + "\n", encoding="utf-8"
        )
    click.echo(f"wrote {out_image}")


@main.command()
@click.option("--host", default=None, help="bind address (default env CARDEX_BIND or 127.0.0.1)")
@click.option("--port", default=None, type=int, help="port (default env CARDEX_PORT or 8000)")
def serve(host, port):
    """Start the extraction REST service."""
    import os

    import uvicorn

    from .service import create_app

    host = host or os.environ.get("CARDEX_BIND", "127.0.0.1")
    port = port or int(os.environ.get("CARDEX_PORT", "8000"))
    try:
        app = create_app()
    except CardexError as exc:
        _fail(str(exc))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
