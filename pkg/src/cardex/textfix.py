"""OCR post-processing: edit distance, fuzzy lexicon correction, gender
standardization, ordered character substitutions, and date normalization.

Strings are compared on Unicode scalar values (not grapheme clusters);
adequate at the fidelity OCR provides for Devanagari, and deterministic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import accel
from .errors import ConfigError, DateError

DEFAULT_THRESHOLD = 0.7

_WS = re.compile(r"\s+")

_DEVANAGARI_DIGITS = str.maketrans("०१२३४५६७८९", "0123456789")

DATA_DIR = Path(__file__).parent / "data"


@dataclass(frozen=True)
class Lexicon:
    """Canonical entries plus an optional surface-form -> code mapping."""

    name: str
    entries: tuple[str, ...]
    threshold: float = DEFAULT_THRESHOLD
    mapping: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        entries = tuple(self.entries)
        if len(set(entries)) != len(entries):
            raise ConfigError(f"lexicon {self.name!r} has duplicate entries")
        if any(not e for e in entries):
            raise ConfigError(f"lexicon {self.name!r} has an empty entry")
        if not (0.0 <= self.threshold <= 1.0):
            raise ConfigError(f"threshold must be in [0, 1], got {self.threshold}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_file(cls, path, name=None, threshold=DEFAULT_THRESHOLD) -> "Lexicon":
        """One canonical entry per line; optional "surface<TAB>code" form;
        lines starting with # are comments."""
        path = Path(path)
        entries = []
        mapping = {}
        for line in path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "\t" in line:
                surface, code = line.split("\t", 1)
                entries.append(surface.strip())
                mapping[surface.strip()] = code.strip()
            else:
                entries.append(line)
        return cls(name or path.stem, tuple(entries), threshold, mapping)


@dataclass(frozen=True)
class SubstitutionRule:
    src: str
    dst: str
    scope: str = "all"

    def __post_init__(self):
        if not self.src:
            raise ConfigError("substitution source must be non-empty")


@dataclass(frozen=True)
class SubstitutionTable:
    rules: tuple[SubstitutionRule, ...]

    @classmethod
    def from_file(cls, path) -> "SubstitutionTable":
        """UTF-8 "from<TAB>to" per line with an optional scope column."""
        rules = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise ConfigError(f"substitution line needs at least 2 tab-separated fields: {line!r}")
            scope = parts[2].strip() if len(parts) > 2 and parts[2].strip() else "all"
            rules.append(SubstitutionRule(parts[0], parts[1], scope))
        return cls(tuple(rules))


@dataclass(frozen=True)
class CorrectionOutcome:
    value: str
    applied: bool
    similarity: float
    candidate_rank: tuple[tuple[str, float], ...] = ()


def levenshtein(a: str, b: str) -> int:
    """Minimal insert/delete/substitute count over Unicode scalar values."""
    arr_a = np.array([ord(c) for c in a], dtype=np.uint32)
    arr_b = np.array([ord(c) for c in b], dtype=np.uint32)
    return int(accel.levenshtein_u32(arr_a, arr_b))


def similarity(a: str, b: str) -> float:
    """1 - levenshtein / max length; two empty strings are identical."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def normalize_token(raw: str) -> str:
    return _WS.sub(" ", raw.strip())


def correct_token(raw: str, lex: Lexicon) -> CorrectionOutcome:
    """Fuzzy-match against the lexicon; apply the best entry if it clears
    the threshold. Ties break on lower edit distance, then lexicographic
    entry order, so the result is independent of entry ordering."""
    if not lex.entries:
        raise ConfigError(f"lexicon {lex.name!r} is empty")
    token = normalize_token(raw)
    scored = []
    for entry in lex.entries:
        scored.append((entry, similarity(token, entry), levenshtein(token, entry)))
    scored.sort(key=lambda s: (-s[1], s[2], s[0]))
    rank = tuple((entry, sim) for entry, sim, _ in scored)
    best_entry, best_sim, _ = scored[0]
    if best_sim >= lex.threshold:
        return CorrectionOutcome(best_entry, True, best_sim, rank)
    return CorrectionOutcome(raw, False, best_sim, rank)


def standardize_gender(raw: str, mapping_lexicon: Lexicon) -> CorrectionOutcome:
    """Fuzzy-match raw against surface forms and emit the mapped code."""
    if not mapping_lexicon.mapping:
        raise ConfigError(f"lexicon {mapping_lexicon.name!r} carries no code mapping")
    outcome = correct_token(raw, mapping_lexicon)
    if outcome.applied:
        code = mapping_lexicon.mapping[outcome.value]
        return CorrectionOutcome(code, True, outcome.similarity, outcome.candidate_rank)
    return outcome


def apply_substitutions(raw: str, table: SubstitutionTable, scope: str = "all") -> str:
    """Apply rules in listed order (left-to-right, non-overlapping per rule,
    single pass: no fixpoint loop)."""
    text = raw
    for rule in table.rules:
        if rule.scope != "all" and rule.scope != scope:
            continue
        text = text.replace(rule.src, rule.dst)
    return text


_DATE_SHAPE = re.compile(r"^(\d{4})-(\d{1,2})-(\d{1,2})$")


def normalize_date(raw: str) -> str:
    """Normalize to YYYY-MM-DD: Devanagari digits mapped to ASCII,
    separators in {/, -, ., space} unified to "-". Day range reaches 32
    (Bikram Sambat months); dates stay in the BS calendar."""
    text = normalize_token(raw).translate(_DEVANAGARI_DIGITS)
    text = re.sub(r"[/. ]", "-", text)
    m = _DATE_SHAPE.match(text)
    if not m:
        raise DateError(raw, "date does not match YYYY-MM-DD shape")
    year, month, day = (int(g) for g in m.groups())
    if not (1 <= month <= 12):
        raise DateError(raw, f"month {month} out of range")
    if not (1 <= day <= 32):
        raise DateError(raw, f"day {day} out of range")
    return f"{year:04d}-{month:02d}-{day:02d}"


def default_district_lexicon(threshold: float = DEFAULT_THRESHOLD) -> Lexicon:
    return Lexicon.from_file(DATA_DIR / "districts.txt", "districts", threshold)


def default_gender_lexicon(threshold: float = DEFAULT_THRESHOLD) -> Lexicon:
    return Lexicon.from_file(DATA_DIR / "gender.txt", "gender", threshold)


def default_substitutions() -> SubstitutionTable:
    return SubstitutionTable.from_file(DATA_DIR / "substitutions.txt")
