#!/usr/bin/env python3
"""Stand-in OCR command for fixtures: maps the crop's pixel size to canned
text via stub_sizes.json and prints "text<TAB>confidence".

Usage: stub_ocr.py IMAGE LANG
"""

import json
import sys
from pathlib import Path

from PIL import Image


def main():
    image_path, _lang = sys.argv[1], sys.argv[2]
    sizes = json.loads(
        (Path(__file__).parent / "stub_sizes.json").read_text(encoding="utf-8")
    )
    with Image.open(image_path) as im:
        w, h = im.size
    best_key, best_dist = None, None
    for key in sizes:
        kw, kh = (int(v) for v in key.split("x"))
        dist = abs(kw - w) + abs(kh - h)
        if best_dist is None or dist < best_dist:
            best_key, best_dist = key, dist
    text, confidence = sizes[best_key]
    sys.stdout.write(f"{text}\t{confidence}\n")


if __name__ == "__main__":
    main()
