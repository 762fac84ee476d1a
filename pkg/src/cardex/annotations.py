"""YOLO-format label parsing/serialization, dataset YAML configs, and
deterministic stratified train/validation splitting.

File conventions:
  * label files: UTF-8 text, one "cat cx cy w h" line per object, same
    basename as the image with a .txt extension
  * dataset config: YAML with keys train, val, names (list)
  * split output: images/ and labels/ subtrees mirrored under train/ and val/
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import yaml

from .errors import ConfigError, DegenerateBox, ParseError
from .types import CategorySchema, NormBox

COORD_DECIMALS = 6


@dataclass(frozen=True)
class DatasetConfig:
    train_path: str
    val_path: str
    names: tuple[str, ...]

    def __post_init__(self):
        if not self.names:
            raise ConfigError("names must be non-empty")
        if len(set(self.names)) != len(self.names):
            raise ConfigError("names must be unique")
        object.__setattr__(self, "names", tuple(self.names))


@dataclass(frozen=True)
class SplitSpec:
    seed: int
    train_ratio: float

    def __post_init__(self):
        if not (0.0 < self.train_ratio < 1.0):
            raise ConfigError(f"train_ratio must be in (0, 1), got {self.train_ratio}")


def parse_yolo_label(text: str, schema: CategorySchema) -> list[tuple[int, NormBox]]:
    """Parse "cat cx cy w h" lines, validating against the schema."""
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        tokens = stripped.split()
        if len(tokens) != 5:
            raise ParseError(f"expected 5 tokens, got {len(tokens)}", lineno)
        try:
            cat = int(tokens[0])
            coords = [float(t) for t in tokens[1:]]
        except ValueError as exc:
            raise ParseError(f"non-numeric token: {exc}", lineno) from exc
        if not schema.valid_category(cat):
            raise ParseError(f"category {cat} out of range for schema ({len(schema)} names)", lineno)
        try:
            box = NormBox(*coords)
        except DegenerateBox as exc:
            raise ParseError(str(exc), lineno) from exc
        entries.append((cat, box))
    return entries


def serialize_yolo_label(entries: list[tuple[int, NormBox]]) -> str:
    """One line per entry, 6-decimal fixed-point coordinates."""
    lines = [
        f"{cat} {box.cx:.{COORD_DECIMALS}f} {box.cy:.{COORD_DECIMALS}f}"
        f" {box.w:.{COORD_DECIMALS}f} {box.h:.{COORD_DECIMALS}f}"
        for cat, box in entries
    ]
    return "\n".join(lines)


def parse_dataset_config(text: str) -> DatasetConfig:
    """Read train/val/names from a YAML document; unknown keys are ignored."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("dataset config must be a YAML mapping")
    for key in ("train", "val", "names"):
        if key not in doc:
            raise ConfigError(f"missing required key {key!r}")
    names = doc["names"]
    if isinstance(names, dict):  # index->name mapping form
        names = [names[k] for k in sorted(names)]
    if not isinstance(names, list) or not names:
        raise ConfigError("names must be a non-empty list")
    return DatasetConfig(
        train_path=str(doc["train"]),
        val_path=str(doc["val"]),
        names=tuple(str(n) for n in names),
    )


def serialize_dataset_config(cfg: DatasetConfig) -> str:
    return yaml.safe_dump(
        {"train": cfg.train_path, "val": cfg.val_path, "names": list(cfg.names)},
        sort_keys=False,
        allow_unicode=True,
    )


def split_dataset(items, spec: SplitSpec, stratum_of=None):
    """Seeded, stratified train/validation split.

    ``stratum_of`` maps an item to its stratum key (default: one stratum).
    Per stratum, items are shuffled with a PRNG seeded from (seed, stratum)
    and the first round(ratio * n) go to train. Strata with fewer than 2
    items go wholly to train.

    Returns (train, val, warnings).
    """
    items = list(items)
    if not items:
        raise ConfigError("cannot split an empty item list")
    if stratum_of is None:
        stratum_of = lambda _item: ""
    strata: dict[str, list] = {}
    for item in items:
        strata.setdefault(str(stratum_of(item)), []).append(item)

    train, val, warnings = [], [], []
    for key in sorted(strata):
        group = strata[key]
        if len(group) < 2:
            train.extend(group)
            warnings.append(f"stratum {key!r} has fewer than 2 items; placed wholly in train")
            continue
        rng = random.Random(f"{spec.seed}:{key}")
        order = list(range(len(group)))
        rng.shuffle(order)
        # round half away from zero, so 250 * 0.84 -> exactly 210
        n_train = int(spec.train_ratio * len(group) + 0.5)
        n_train = min(max(n_train, 1), len(group) - 1)
        train.extend(group[i] for i in order[:n_train])
        val.extend(group[i] for i in order[n_train:])
    return train, val, warnings
