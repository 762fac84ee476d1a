"""REST backend: accepts base64-encoded card images in JSON, runs the
extraction pipeline, returns structured fields, and keeps an append-only
review history.

History persistence is a JSON-lines log with edits as superseding records;
replaying the log reconstructs identical in-memory state after a restart.

Environment variables (all optional):
  CARDEX_BIND / CARDEX_PORT   bind address and port (serve command)
  CARDEX_HISTORY_PATH         history log file (default ./cardex_history.jsonl)
  CARDEX_LEXICON_DIR          directory overriding the bundled lexicons
  CARDEX_FIXTURE_MODE         "1": fixture detector + stub OCR (demo/tests)
  CARDEX_FIXTURE_DETS         detection dump keyed "front"/"back"
  CARDEX_STUB_OCR             JSON {category: [text, confidence]} for the stub
  CARDEX_OCR_CMD              external OCR command template ({image}, {lang})
  CARDEX_RECT_W / CARDEX_RECT_H   rectified card size override
"""

from __future__ import annotations

import base64
import binascii
import datetime
import json
import os
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .errors import CardexError, InvalidDomain, NoCardFound, PortError
from .extraction import (
    ExternalOcrClient,
    FixtureDetector,
    PipelineConfig,
    SideFailure,
    StubOcr,
    extract_document,
)
from .pngio import load_image_bytes
from .textfix import Lexicon, SubstitutionTable

HISTORY_DEFAULT = "cardex_history.jsonl"


def new_entry_id() -> str:
    """Lexicographically sortable unique id (time-ordered prefix)."""
    return f"{time.time_ns():016x}{secrets.token_hex(4)}"


@dataclass
class HistoryEntry:
    id: str
    created_at: str
    front: dict
    back: dict
    edited_fields: dict = field(default_factory=dict)
    status: str = "extracted"

    def summary(self) -> dict:
        return {"id": self.id, "created_at": self.created_at, "status": self.status}

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "created_at": self.created_at,
            "front": self.front,
            "back": self.back,
            "edited_fields": self.edited_fields,
            "status": self.status,
        }


class HistoryStore:
    """Append-only JSON-lines store; a single writer lock keeps log lines
    whole under concurrent requests."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[str, HistoryEntry] = {}
        if self.path.exists():
            self._replay()

    def _replay(self):
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            kind = record["type"]
            if kind == "extract":
                entry = HistoryEntry(
                    id=record["id"],
                    created_at=record["created_at"],
                    front=record["front"],
                    back=record["back"],
                )
                self._entries[entry.id] = entry
            elif kind == "edit":
                entry = self._entries[record["id"]]
                entry.edited_fields.update(record["fields"])
                entry.status = "edited"
            elif kind == "save":
                self._entries[record["id"]].status = "saved"

    def _append(self, record: dict):
        line = json.dumps(record, ensure_ascii=False)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def add_extraction(self, front: dict, back: dict) -> HistoryEntry:
        with self._lock:
            entry = HistoryEntry(
                id=new_entry_id(),
                created_at=datetime.datetime.now(datetime.timezone.utc).isoformat(),
                front=front,
                back=back,
            )
            self._append(
                {
                    "type": "extract",
                    "id": entry.id,
                    "created_at": entry.created_at,
                    "front": front,
                    "back": back,
                }
            )
            self._entries[entry.id] = entry
            return entry

    def get(self, entry_id: str) -> HistoryEntry | None:
        return self._entries.get(entry_id)

    def edit(self, entry_id: str, fields: dict) -> HistoryEntry:
        with self._lock:
            entry = self._entries[entry_id]
            self._append({"type": "edit", "id": entry_id, "fields": fields})
            entry.edited_fields.update(fields)
            entry.status = "edited"
            return entry

    def mark_saved(self, entry_id: str) -> HistoryEntry:
        with self._lock:
            entry = self._entries[entry_id]
            self._append({"type": "save", "id": entry_id})
            entry.status = "saved"
            return entry

    def newest_first(self, limit: int = 50) -> list[HistoryEntry]:
        ids = sorted(self._entries, reverse=True)
        return [self._entries[i] for i in ids[:limit]]


def _error(status: int, code: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, **extra}})


def _pipeline_from_env() -> PipelineConfig:
    overrides = {}
    lex_dir = os.environ.get("CARDEX_LEXICON_DIR")
    if lex_dir:
        lex_dir = Path(lex_dir)
        lexicons = {}
        district = lex_dir / "districts.txt"
        gender = lex_dir / "gender.txt"
        subs = lex_dir / "substitutions.txt"
        if district.exists():
            lexicons["district"] = Lexicon.from_file(district, "districts")
        if gender.exists():
            lexicons["gender"] = Lexicon.from_file(gender, "gender")
        if lexicons:
            overrides["lexicons"] = lexicons
        if subs.exists():
            overrides["substitutions"] = SubstitutionTable.from_file(subs)
    if os.environ.get("CARDEX_RECT_W"):
        overrides["rect_w"] = int(os.environ["CARDEX_RECT_W"])
    if os.environ.get("CARDEX_RECT_H"):
        overrides["rect_h"] = int(os.environ["CARDEX_RECT_H"])
    return PipelineConfig.default(**overrides)


def _ports_from_env():
    """Build (front detector, back detector, ocr) from env configuration."""
    dets_path = os.environ.get("CARDEX_FIXTURE_DETS")
    if not dets_path:
        raise CardexError("CARDEX_FIXTURE_DETS must point to a detection dump")
    dump_text = Path(dets_path).read_text(encoding="utf-8")
    front = FixtureDetector(dump_text, "front")
    back = FixtureDetector(dump_text, "back")

    fixture_mode = os.environ.get("CARDEX_FIXTURE_MODE", "").strip().lower() in ("1", "true", "yes")
    if fixture_mode:
        stub_path = os.environ.get("CARDEX_STUB_OCR")
        mapping = {}
        if stub_path:
            raw = json.loads(Path(stub_path).read_text(encoding="utf-8"))
            mapping = {k: (v[0], float(v[1])) for k, v in raw.items()}
        ocr = StubOcr(mapping)
    else:
        cmd = os.environ.get("CARDEX_OCR_CMD")
        if not cmd:
            raise CardexError("CARDEX_OCR_CMD required when not in fixture mode")
        ocr = ExternalOcrClient(cmd)
    return front, back, ocr


def create_app(
    history_path=None,
    pipeline_cfg: PipelineConfig | None = None,
    front_detector=None,
    back_detector=None,
    ocr=None,
) -> FastAPI:
    """App factory; ports not passed explicitly are built from env vars."""
    cfg = pipeline_cfg or _pipeline_from_env()
    if front_detector is None or back_detector is None or ocr is None:
        env_front, env_back, env_ocr = _ports_from_env()
        front_detector = front_detector or env_front
        back_detector = back_detector or env_back
        ocr = ocr or env_ocr
    store = HistoryStore(history_path or os.environ.get("CARDEX_HISTORY_PATH", HISTORY_DEFAULT))

    app = FastAPI(title="cardex extraction service", version="1.0")
    app.state.history = store
    app.state.pipeline = cfg

    def _decode_image(payload: dict, key: str):
        if key not in payload or not isinstance(payload[key], str):
            return None, _error(400, "missing_field", field=key)
        try:
            data = base64.b64decode(payload[key], validate=True)
        except (binascii.Error, ValueError):
            return None, _error(400, "bad_base64", field=key)
        try:
            return load_image_bytes(data), None
        except InvalidDomain:
            return None, _error(400, "bad_image", field=key)

    @app.post("/api/v1/extract")
    async def extract(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return _error(400, "bad_json")
        if not isinstance(payload, dict):
            return _error(400, "bad_json")
        front_img, err = _decode_image(payload, "front_image")
        if err:
            return err
        back_img, err = _decode_image(payload, "back_image")
        if err:
            return err
        try:
            front_res, back_res = extract_document(
                front_img, back_img, front_detector, back_detector, ocr, cfg
            )
        except PortError as exc:
            return _error(502, "port_error", message=str(exc))
        for res in (front_res, back_res):
            if isinstance(res, SideFailure):
                if res.code == "no_card_found":
                    return _error(422, "no_card_found", side=res.side)
                return _error(502, res.code, side=res.side, message=res.message)
        entry = store.add_extraction(front_res.to_dict(), back_res.to_dict())
        return {
            "id": entry.id,
            "front": entry.front,
            "back": entry.back,
            "warnings": list(front_res.warnings) + list(back_res.warnings),
        }

    def _known_fields() -> set[str]:
        return set(cfg.schema_front.names) | set(cfg.schema_back.names)

    @app.patch("/api/v1/history/{entry_id}")
    async def edit_entry(entry_id: str, request: Request):
        entry = store.get(entry_id)
        if entry is None:
            return _error(404, "unknown_id", id=entry_id)
        try:
            payload = await request.json()
        except Exception:
            return _error(400, "bad_json")
        if not isinstance(payload, dict) or not all(isinstance(v, str) for v in payload.values()):
            return _error(400, "bad_json")
        unknown = [k for k in payload if k not in _known_fields()]
        if unknown:
            return _error(400, "unknown_field", fields=unknown)
        entry = store.edit(entry_id, payload)
        return entry.to_dict()

    @app.post("/api/v1/history/{entry_id}/save")
    async def save_entry(entry_id: str):
        entry = store.get(entry_id)
        if entry is None:
            return _error(404, "unknown_id", id=entry_id)
        entry = store.mark_saved(entry_id)
        lines = []
        for side_doc, schema in ((entry.front, cfg.schema_front), (entry.back, cfg.schema_back)):
            for name in schema.names:
                value = entry.edited_fields.get(name)
                if value is None:
                    fv = side_doc.get("fields", {}).get(name)
                    if fv is None:
                        continue
                    value = fv["corrected_text"]
                lines.append(f"{name}: {value}")
        return PlainTextResponse(
            "\n".join(lines) + "\n",
            media_type="text/plain; charset=utf-8",
            headers={"Content-Disposition": f'attachment; filename="{entry.id}.txt"'},
        )

    @app.get("/api/v1/history")
    async def history(limit: int = 50):
        return [e.summary() for e in store.newest_first(limit)]

    @app.get("/api/v1/history/{entry_id}")
    async def get_entry(entry_id: str):
        entry = store.get(entry_id)
        if entry is None:
            return _error(404, "unknown_id", id=entry_id)
        return entry.to_dict()

    return app
