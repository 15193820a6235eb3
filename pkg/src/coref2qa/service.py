"""Annotation service: HTTP API over passage ranking, guideline validation,
and an append-only pair store.

The store is a JSONL log; every accepted pair (and any later status change)
is one line, and replaying the log reconstructs the exact state with
last-write-wins per record id. A partial trailing line, e.g. after a crash,
is truncated with a warning on load. Writes go through a single lock so
concurrent requests never interleave partial lines.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import curation, probes
from .curation import DraftPair, Passage, Span, ValidationReport
from .qa_data import Answer, QADataset, QAExample, write_squad_json

logger = logging.getLogger(__name__)

Status = Literal["draft", "accepted", "rejected"]


class StoreCorrupt(Exception):
    pass


class BindError(Exception):
    pass


@dataclass
class PairRecord:
    record_id: int
    draft: DraftPair
    status: Status
    created_at: str
    validation: ValidationReport

    def to_json(self) -> dict:
        return {
            "id": self.record_id,
            **self.draft.to_json(),
            "status": self.status,
            "created_at": self.created_at,
            "validation": self.validation.to_json(),
        }

    @classmethod
    def from_json(cls, payload: dict) -> "PairRecord":
        return cls(
            record_id=int(payload["id"]),
            draft=DraftPair.from_json(payload),
            status=payload["status"],
            created_at=payload["created_at"],
            validation=ValidationReport.from_json(payload["validation"]),
        )


class PairStore:
    """Append-only JSONL log of pair records."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: dict[int, PairRecord] = {}
        self._order: list[int] = []
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            return
        raw = self.path.read_bytes()
        good_end = len(raw)
        if raw and not raw.endswith(b"\n"):
            good_end = raw.rfind(b"\n") + 1
            logger.warning(
                "store %s has a partial trailing line; truncating %d byte(s)",
                self.path,
                len(raw) - good_end,
            )
            self.path.write_bytes(raw[:good_end])
        for line_no, line in enumerate(raw[:good_end].decode("utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = PairRecord.from_json(json.loads(line))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise StoreCorrupt(f"{self.path}:{line_no}: {exc}") from exc
            self._remember(record)

    def _remember(self, record: PairRecord) -> None:
        if record.record_id not in self._records:
            self._order.append(record.record_id)
        self._records[record.record_id] = record

    def append(self, record: PairRecord) -> None:
        with self._lock:
            self._write(record)

    def create(self, draft: DraftPair, status: Status, validation: ValidationReport) -> PairRecord:
        """Allocate the next id and append atomically."""
        with self._lock:
            record = PairRecord(
                record_id=max(self._records, default=0) + 1,
                draft=draft,
                status=status,
                created_at=datetime.now(timezone.utc).isoformat(),
                validation=validation,
            )
            self._write(record)
            return record

    def _write(self, record: PairRecord) -> None:
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")
            handle.flush()
        self._remember(record)

    def records(self) -> list[PairRecord]:
        return [self._records[i] for i in self._order]

    def accepted(self) -> list[PairRecord]:
        return [r for r in self.records() if r.status == "accepted"]


@dataclass
class ServiceConfig:
    corpus_path: str
    store_path: str
    host: str = "127.0.0.1"
    port: int = 8008
    scorer: str = "tfidf"
    embedding_endpoint: str | None = None
    pronouns_first: bool = False

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "ServiceConfig":
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
        payload.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**payload)


def load_passages(path: str | Path) -> list[Passage]:
    """Corpus file: {"passages": [{"id", "text", "entities": [{start,end,label}]?}]}."""
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    passages = []
    for entry in payload["passages"]:
        entities = [
            (Span(int(e["start"]), int(e["end"])), str(e.get("label", "PERSON")))
            for e in entry.get("entities", [])
        ]
        passages.append(Passage(passage_id=str(entry["id"]), text=entry["text"], entities=entities))
    return passages


def export_pairs(store: PairStore, corpus: dict[str, Passage]) -> QADataset:
    """Accepted records as an extractive QA dataset; every record re-validates all-pass."""
    examples = []
    for record in store.accepted():
        passage = corpus[record.draft.passage_id]
        others = [r.draft for r in store.accepted() if r.record_id != record.record_id]
        report = curation.validate_pair(record.draft, passage, others)
        if not report.passed:
            failed = [n for n, r in report.rules.items() if not r.passed]
            raise StoreCorrupt(f"record {record.record_id} no longer validates: {failed}")
        record.draft.answer.check(passage.text, f"record {record.record_id}")
        examples.append(
            QAExample(
                qid=f"{record.draft.passage_id}.pair{record.record_id}",
                question=record.draft.question,
                context=passage.text,
                answers=[Answer(record.draft.answer.text, record.draft.answer.answer_start)],
                tags={f"doc:{record.draft.passage_id}"},
            )
        )
    return QADataset(name="annotated_pairs", examples=examples)


class SpanModel(BaseModel):
    start: int
    end: int


class AnswerModel(BaseModel):
    text: str
    answer_start: int


class DraftPairModel(BaseModel):
    passage_id: str
    question: str = ""
    answer: AnswerModel
    m1: SpanModel
    m2: SpanModel

    def to_draft(self) -> DraftPair:
        return DraftPair(
            passage_id=self.passage_id,
            question=self.question,
            answer=Answer(self.answer.text, self.answer.answer_start),
            m1=Span(self.m1.start, self.m1.end),
            m2=Span(self.m2.start, self.m2.end),
        )


def create_app(config: ServiceConfig) -> FastAPI:
    passages = load_passages(config.corpus_path)
    corpus = {p.passage_id: p for p in passages}
    store = PairStore(config.store_path)

    if config.scorer == "embedding":
        if not config.embedding_endpoint:
            raise ValueError("embedding scorer requires embedding_endpoint")
        scorer: probes.SimilarityScorer = probes.EmbeddingServiceScorer(config.embedding_endpoint)
    else:
        scorer = probes.TfidfScorer(
            s for p in passages for s, _ in probes.split_sentences(p.text)
        )

    ranked = curation.rank_passages(passages, pronouns_first=config.pronouns_first)

    app = FastAPI(title="coref2qa annotation service")
    app.state.store = store
    app.state.corpus = corpus

    def get_passage(passage_id: str) -> Passage:
        passage = corpus.get(passage_id)
        if passage is None:
            raise HTTPException(status_code=404, detail=f"unknown passage {passage_id!r}")
        return passage

    @app.get("/passages")
    def list_passages(sort: str = "score") -> list[dict]:
        scores = ranked
        if sort == "id":
            scores = sorted(ranked, key=lambda s: s.passage_id)
        elif sort != "score":
            raise HTTPException(status_code=400, detail=f"unknown sort {sort!r}")
        return [s.to_json() for s in scores]

    @app.get("/passages/{passage_id}")
    def passage_detail(passage_id: str) -> dict:
        passage = get_passage(passage_id)
        return {
            "passage_id": passage.passage_id,
            "text": passage.text,
            "entities": [
                {"start": span.start, "end": span.end, "label": label, "text": span.text_in(passage.text)}
                for span, label in passage.entities
            ],
            "pronoun_spans": [
                {"start": s.start, "end": s.end, "text": s.text_in(passage.text)}
                for s in curation.pronoun_spans(passage.text)
            ],
            "sentences": [
                {"index": i, "start": offset, "text": text}
                for i, (text, offset) in enumerate(probes.split_sentences(passage.text))
            ],
        }

    def run_validation(model: DraftPairModel) -> tuple[DraftPair, ValidationReport, dict | None]:
        passage = get_passage(model.passage_id)
        draft = model.to_draft()
        try:
            report = curation.validate_pair(draft, passage, [r.draft for r in store.accepted()])
        except curation.SpanOutOfRange as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        preview = None
        if draft.question.strip():
            preview = curation.bias_preview(draft, passage, scorer)
        return draft, report, preview

    @app.post("/validate")
    def validate(model: DraftPairModel) -> dict:
        _, report, preview = run_validation(model)
        return {"validation": report.to_json(), "bias_preview": preview}

    @app.post("/pairs")
    def post_pair(model: DraftPairModel) -> JSONResponse:
        draft, report, preview = run_validation(model)
        if not report.passed:
            return JSONResponse(
                status_code=422,
                content={"validation": report.to_json(), "bias_preview": preview},
            )
        record = store.create(draft, "accepted", report)
        return JSONResponse(status_code=201, content=record.to_json())

    @app.get("/pairs")
    def list_pairs() -> list[dict]:
        return [r.to_json() for r in store.records()]

    @app.get("/export")
    def export() -> JSONResponse:
        ds = export_pairs(store, corpus)
        return JSONResponse(content=json.loads(write_squad_json(ds)))

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service until interrupted; store writes are flushed per append."""
    import uvicorn

    app = create_app(config)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    except OSError as exc:
        raise BindError(f"cannot bind {config.host}:{config.port}: {exc}") from exc
