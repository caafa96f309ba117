"""Content-addressed, append-only corpus store.

Single source of truth for collected documents, analyst labels, and
trained model artifacts. Layout under the store root:

    docs.jsonl            one JSON object per document record (last wins per id)
    labels.jsonl          one JSON object per label event (append-only)
    blobs/<first2>/<hash> raw page bytes, keyed by their own sha256
    models/v<NNNN>.json   model artifacts, one file per version

Single writer, many readers: a reader sees the snapshot present at open
time; re-open to observe later appends.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import InvalidUrlError, StorageIOError, UnknownDocumentError
from .urls import normalize_url

SOURCES = {"seed-crawl", "backlink", "metasearch", "manual"}
CATEGORIES = {"market", "forum", "ideology", "terror-suspect", "blog", "other"}
LABELS = {"relevant", "irrelevant"}


def content_id(url: str, raw: bytes) -> str:
    """Document id: sha256 over the normalized URL and the raw bytes."""
    h = hashlib.sha256()
    h.update(url.encode("utf-8"))
    h.update(b"\n")
    h.update(raw)
    return h.hexdigest()


def blob_id(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


@dataclass
class Document:
    id: str
    url: str
    source: str
    fetched_at: int
    raw_ref: str
    text: str
    lang: str | None = None
    category: str | None = None
    label: str | None = None
    score: float | None = None
    score_model_version: int | None = None

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "url": self.url,
            "source": self.source,
            "fetched_at": self.fetched_at,
            "raw_ref": self.raw_ref,
            "text": self.text,
            "lang": self.lang,
            "category": self.category,
            "label": self.label,
            "score": self.score,
            "score_model_version": self.score_model_version,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Document":
        return cls(**rec)


@dataclass(frozen=True)
class LabelEvent:
    doc_id: str
    label: str
    analyst: str
    at: int
    seq: int = field(default=0, compare=False)

    def to_record(self) -> dict:
        return {"doc_id": self.doc_id, "label": self.label, "analyst": self.analyst, "at": self.at}


def make_document(
    url: str,
    raw: bytes,
    *,
    source: str,
    fetched_at: int,
    text: str,
    lang: str | None = None,
    category: str | None = None,
) -> tuple[Document, bytes]:
    """Build a Document with its content id and blob ref computed.

    Returns the document together with the raw bytes so callers can hand
    both to put_document without re-reading anything.
    """
    if source not in SOURCES:
        raise ValueError(f"unknown source {source!r}")
    if category is not None and category not in CATEGORIES:
        raise ValueError(f"unknown category {category!r}")
    doc = Document(
        id=content_id(url, raw),
        url=url,
        source=source,
        fetched_at=fetched_at,
        raw_ref=blob_id(raw),
        text=text,
        lang=lang,
        category=category,
    )
    return doc, raw


def _dumps(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


class CorpusStore:
    """Append-only document/label/model persistence rooted at a directory."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self._docs_path = self.root / "docs.jsonl"
        self._labels_path = self.root / "labels.jsonl"
        self._blobs_dir = self.root / "blobs"
        self._models_dir = self.root / "models"
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            self._blobs_dir.mkdir(exist_ok=True)
        except OSError as exc:
            raise StorageIOError(str(exc)) from exc
        self._docs: dict[str, Document] = {}
        self._events: list[LabelEvent] = []
        self._load()

    # ------------------------------------------------------------------
    # Loading
    # ------------------------------------------------------------------
    def _load(self) -> None:
        if self._docs_path.exists():
            with self._docs_path.open(encoding="utf-8") as f:
                for line in f:
                    if not line.strip():
                        continue
                    doc = Document.from_record(json.loads(line))
                    self._docs[doc.id] = doc
        if self._labels_path.exists():
            with self._labels_path.open(encoding="utf-8") as f:
                for seq, line in enumerate(f):
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    self._events.append(LabelEvent(seq=seq, **rec))
        self._apply_effective_labels()

    def _apply_effective_labels(self) -> None:
        # Latest event per doc wins; file order breaks timestamp ties.
        latest: dict[str, LabelEvent] = {}
        for ev in self._events:
            cur = latest.get(ev.doc_id)
            if cur is None or (ev.at, ev.seq) >= (cur.at, cur.seq):
                latest[ev.doc_id] = ev
        for doc_id, ev in latest.items():
            if doc_id in self._docs:
                self._docs[doc_id] = replace(self._docs[doc_id], label=ev.label)

    # ------------------------------------------------------------------
    # Documents
    # ------------------------------------------------------------------
    def put_document(self, doc: Document, raw: bytes) -> str:
        """Append a document; idempotent for identical (url, raw bytes)."""
        if normalize_url(doc.url) != doc.url:
            raise InvalidUrlError(f"url not in canonical form: {doc.url!r}")
        expected = content_id(doc.url, raw)
        if doc.id and doc.id != expected:
            raise StorageIOError(f"document id {doc.id} does not match content hash {expected}")
        doc = replace(doc, id=expected, raw_ref=blob_id(raw))
        if doc.id in self._docs:
            return doc.id
        try:
            self._write_blob(doc.raw_ref, raw)
            self._append(self._docs_path, doc.to_record())
        except OSError as exc:
            raise StorageIOError(str(exc)) from exc
        self._docs[doc.id] = doc
        return doc.id

    def get_document(self, doc_id: str) -> Document:
        try:
            return self._docs[doc_id]
        except KeyError:
            raise UnknownDocumentError(doc_id) from None

    def has_document(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def documents(self) -> list[Document]:
        return sorted(self._docs.values(), key=lambda d: d.id)

    def __len__(self) -> int:
        return len(self._docs)

    def get_raw(self, doc: Document | str) -> bytes:
        if isinstance(doc, str):
            doc = self.get_document(doc)
        path = self._blob_path(doc.raw_ref)
        try:
            return path.read_bytes()
        except OSError as exc:
            raise StorageIOError(str(exc)) from exc

    def set_score(self, doc_id: str, score: float, model_version: int) -> None:
        """Stamp a model score onto a document (appends an updated record)."""
        if not 0.0 <= score <= 1.0:
            raise ValueError(f"score out of range: {score}")
        doc = self.get_document(doc_id)
        updated = replace(doc, score=score, score_model_version=model_version)
        try:
            self._append(self._docs_path, updated.to_record())
        except OSError as exc:
            raise StorageIOError(str(exc)) from exc
        self._docs[doc_id] = updated

    # ------------------------------------------------------------------
    # Labels
    # ------------------------------------------------------------------
    def apply_label(self, doc_id: str, label: str, analyst: str, at: int | None = None) -> LabelEvent:
        if label not in LABELS:
            raise ValueError(f"unknown label {label!r}")
        doc = self.get_document(doc_id)
        event = LabelEvent(
            doc_id=doc_id,
            label=label,
            analyst=analyst,
            at=int(time.time()) if at is None else at,
            seq=len(self._events),
        )
        try:
            self._append(self._labels_path, event.to_record())
        except OSError as exc:
            raise StorageIOError(str(exc)) from exc
        self._events.append(event)
        self._docs[doc_id] = replace(doc, label=label)
        return event

    def label_events(self) -> list[LabelEvent]:
        return list(self._events)

    def effective_label(self, doc_id: str) -> str | None:
        return self.get_document(doc_id).label

    def labeled_documents(self) -> list[Document]:
        return [d for d in self.documents() if d.label is not None]

    def list_unlabeled(self) -> list[Document]:
        """Unlabeled documents, score descending, unscored last, ties by id."""
        pending = [d for d in self._docs.values() if d.label is None]
        pending.sort(key=lambda d: (d.score is None, -(d.score or 0.0), d.id))
        return pending

    # ------------------------------------------------------------------
    # Model artifacts
    # ------------------------------------------------------------------
    def save_model(self, payload: dict) -> Path:
        version = int(payload["version"])
        try:
            self._models_dir.mkdir(exist_ok=True)
            path = self._models_dir / f"v{version:04d}.json"
            path.write_text(_dumps(payload) + "\n", encoding="utf-8")
        except OSError as exc:
            raise StorageIOError(str(exc)) from exc
        return path

    def load_latest_model(self) -> dict | None:
        if not self._models_dir.exists():
            return None
        candidates = sorted(self._models_dir.glob("v*.json"))
        if not candidates:
            return None
        return json.loads(candidates[-1].read_text(encoding="utf-8"))

    # ------------------------------------------------------------------
    # Internals
    # ------------------------------------------------------------------
    def _blob_path(self, ref: str) -> Path:
        return self._blobs_dir / ref[:2] / ref

    def _write_blob(self, ref: str, raw: bytes) -> None:
        path = self._blob_path(ref)
        if path.exists():
            return
        path.parent.mkdir(exist_ok=True)
        path.write_bytes(raw)

    @staticmethod
    def _append(path: Path, record: dict) -> None:
        with path.open("a", encoding="utf-8") as f:
            f.write(_dumps(record) + "\n")
