"""HTTP API for the analyst triage loop and the computed reports.

Plain request/response JSON, no sessions: the analyst identity rides in
the X-Analyst header. Reads are concurrent; label and retrain mutations
serialize through one lock, matching the store's single-writer model.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Header, Query
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import pipeline, scoring, textfeat
from .errors import DarkwatchError, DegenerateLabelsError, NotComputedError
from .store import CorpusStore

_ERROR_STATUS = {
    "unknown-doc": 404,
    "degenerate-labels": 409,
    "not-computed": 404,
    "invalid-url": 400,
    "class-mismatch": 409,
    "config-error": 400,
}

# Score shown for documents no model has stamped yet: the zero-model prior.
_NEUTRAL_SCORE = 0.5


@dataclass
class TriageItem:
    doc_id: str
    url: str
    score: float
    score_model_version: int | None
    excerpt: str
    keyword_tags: dict[str, int]

    def to_payload(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "url": self.url,
            "score": self.score,
            "score_model_version": self.score_model_version,
            "excerpt": self.excerpt,
            "keyword_tags": self.keyword_tags,
        }


class TriageService:
    """Store-backed core of the API; usable directly from Python too."""

    def __init__(self, store: CorpusStore, lexicon: textfeat.KeywordLexicon | None = None,
                 hyperparams: scoring.Hyperparams | None = None,
                 run_dir: Path | str | None = None):
        self.store = store
        self.lexicon = lexicon or textfeat.default_lexicon()
        self.hyperparams = hyperparams or scoring.Hyperparams()
        self.run_dir = Path(run_dir) if run_dir else None
        self._write_lock = threading.Lock()
        self._model = None
        self._vocab = None
        self._label_watermark = 0
        payload = store.load_latest_model()
        if payload is not None:
            self._model, self._vocab = scoring.model_from_payload(payload)
            self._label_watermark = int(payload.get("label_seq", 0))

    @property
    def model_version(self) -> int:
        return self._model.version if self._model else 0

    def pending_labels(self) -> int:
        return max(0, len(self.store.label_events()) - self._label_watermark)

    def _item(self, doc) -> TriageItem:
        return TriageItem(
            doc_id=doc.id,
            url=doc.url,
            score=doc.score if doc.score is not None else _NEUTRAL_SCORE,
            score_model_version=doc.score_model_version,
            excerpt=doc.text[:400],
            keyword_tags=textfeat.tag_keywords(doc, self.lexicon),
        )

    def queue(self, limit: int = 50) -> dict:
        items = [self._item(d) for d in self.store.list_unlabeled()[:limit]]
        return {
            "items": [item.to_payload() for item in items],
            "model_version": self.model_version,
            "pending_labels": self.pending_labels(),
        }

    def document(self, doc_id: str) -> dict:
        doc = self.store.get_document(doc_id)
        return {
            "doc_id": doc.id,
            "url": doc.url,
            "source": doc.source,
            "fetched_at": doc.fetched_at,
            "lang": doc.lang,
            "category": doc.category,
            "label": doc.label,
            "score": doc.score,
            "score_model_version": doc.score_model_version,
            "text": doc.text,
            "keyword_tags": textfeat.tag_keywords(doc, self.lexicon),
        }

    def submit_label(self, doc_id: str, label: str, analyst: str) -> dict:
        with self._write_lock:
            event = self.store.apply_label(doc_id, label, analyst)
        return {"doc_id": event.doc_id, "label": event.label, "analyst": event.analyst}

    def retrain(self) -> dict:
        """Refit on all labeled docs, then restamp every unlabeled doc."""
        with self._write_lock:
            labeled = self.store.labeled_documents()
            if not labeled:
                raise DegenerateLabelsError("no labeled documents yet")
            vocab = textfeat.build_vocabulary(labeled)
            pairs = [(textfeat.tfidf_vector(d, vocab), 1 if d.label == "relevant" else 0)
                     for d in labeled]
            model = scoring.train(pairs, vocab, self.hyperparams,
                                  previous_version=self.model_version)
            payload = scoring.model_to_payload(model, vocab)
            payload["train_size"] = len(pairs)
            payload["label_seq"] = len(self.store.label_events())
            self.store.save_model(payload)
            for doc in self.store.list_unlabeled():
                vec = textfeat.tfidf_vector(doc, vocab)
                self.store.set_score(doc.id, scoring.predict_score(model, vec),
                                     model.version)
            self._model, self._vocab = model, vocab
            self._label_watermark = len(self.store.label_events())
        return {"model_version": model.version, "train_size": len(pairs)}

    def reports(self) -> dict:
        if self.run_dir is None:
            raise NotComputedError("service has no run directory configured")
        return pipeline.collect_reports(self.run_dir)


class LabelRequest(BaseModel):
    doc_id: str
    label: Literal["relevant", "irrelevant"]


def create_app(service: TriageService, ui_dir: Path | str | None = None) -> FastAPI:
    app = FastAPI(title="darkwatch", version="0.1.0")

    @app.exception_handler(DarkwatchError)
    async def _darkwatch_error(_, exc: DarkwatchError):
        return JSONResponse(status_code=_ERROR_STATUS.get(exc.code, 400),
                            content={"error": exc.code, "message": str(exc)})

    @app.get("/api/queue")
    def get_queue(limit: int = Query(default=50, ge=0)):
        return service.queue(limit)

    @app.get("/api/doc/{doc_id}")
    def get_doc(doc_id: str):
        return service.document(doc_id)

    @app.post("/api/label")
    def post_label(req: LabelRequest, x_analyst: str = Header(default="anonymous")):
        return service.submit_label(req.doc_id, req.label, x_analyst)

    @app.post("/api/retrain")
    def post_retrain():
        return service.retrain()

    @app.get("/api/reports")
    def get_reports():
        return service.reports()

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
