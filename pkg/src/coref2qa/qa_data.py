"""Extractive QA dataset model, SQuAD-schema JSON I/O, and dataset algebra.

Datasets are immutable after load for all practical purposes: every operation
returns a new dataset. Gold answers carry character offsets into the context
and the offset invariant is enforced on read and on construction helpers.

The SQuAD writer adds a non-standard per-question ``tags`` list when an
example carries tags (source dataset, document id, bias flags); readers that
follow the plain schema ignore it, our reader restores it.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from typing import IO, Iterable

from .lexicon import PRONOUNS


class QADataError(Exception):
    pass


class OffsetMismatch(QADataError):
    pass


class DuplicateQid(QADataError):
    pass


class MalformedRecord(QADataError):
    pass


@dataclass(frozen=True)
class Answer:
    text: str
    answer_start: int

    def check(self, context: str, qid: str = "?") -> None:
        end = self.answer_start + len(self.text)
        if self.answer_start < 0 or context[self.answer_start : end] != self.text:
            raise OffsetMismatch(
                f"{qid}: answer {self.text!r} not at offset {self.answer_start}"
                f" (found {context[self.answer_start:end]!r})"
            )


@dataclass
class QAExample:
    qid: str
    question: str
    context: str
    answers: list[Answer]
    tags: set[str] = field(default_factory=set)

    def check(self) -> None:
        if not self.answers:
            raise MalformedRecord(f"{self.qid}: no answers")
        for answer in self.answers:
            answer.check(self.context, self.qid)

    def doc_tag(self) -> str | None:
        for tag in self.tags:
            if tag.startswith("doc:"):
                return tag
        return None


@dataclass
class QADataset:
    name: str
    examples: list[QAExample] = field(default_factory=list)

    def __post_init__(self):
        seen: set[str] = set()
        for ex in self.examples:
            if ex.qid in seen:
                raise DuplicateQid(f"duplicate qid {ex.qid!r} in dataset {self.name!r}")
            seen.add(ex.qid)

    def __len__(self) -> int:
        return len(self.examples)

    def by_qid(self) -> dict[str, QAExample]:
        return {ex.qid: ex for ex in self.examples}


def read_squad_json(source: str | IO[str], name: str | None = None) -> QADataset:
    """Read SQuAD-schema JSON (a path, JSON string, or open file)."""
    payload = _load_json(source)
    if not isinstance(payload, dict) or "data" not in payload:
        raise MalformedRecord("expected a top-level object with a 'data' list")
    examples: list[QAExample] = []
    for article in payload["data"]:
        for paragraph in article.get("paragraphs", []):
            context = paragraph["context"]
            for qa in paragraph["qas"]:
                answers = [Answer(a["text"], int(a["answer_start"])) for a in qa["answers"]]
                example = QAExample(
                    qid=str(qa["id"]),
                    question=qa.get("question", ""),
                    context=context,
                    answers=answers,
                    tags=set(qa.get("tags", [])),
                )
                example.check()
                examples.append(example)
    return QADataset(name=name or str(payload.get("version", "squad")), examples=examples)


def write_squad_json(ds: QADataset, sink: IO[str] | None = None) -> str:
    """Serialize to SQuAD-schema JSON; consecutive same-context examples share a paragraph."""
    paragraphs: list[dict] = []
    for ex in ds.examples:
        qa = {
            "id": ex.qid,
            "question": ex.question,
            "answers": [{"text": a.text, "answer_start": a.answer_start} for a in ex.answers],
        }
        if ex.tags:
            qa["tags"] = sorted(ex.tags)
        if paragraphs and paragraphs[-1]["context"] == ex.context:
            paragraphs[-1]["qas"].append(qa)
        else:
            paragraphs.append({"context": ex.context, "qas": [qa]})
    payload = {"version": ds.name, "data": [{"title": ds.name, "paragraphs": paragraphs}]}
    text = json.dumps(payload, ensure_ascii=False, indent=1)
    if sink is not None:
        sink.write(text)
    return text


def merge(datasets: list[QADataset], name: str) -> QADataset:
    """Concatenate datasets; qids must be pairwise disjoint. Tags record the source."""
    examples: list[QAExample] = []
    for ds in datasets:
        for ex in ds.examples:
            examples.append(
                QAExample(
                    qid=ex.qid,
                    question=ex.question,
                    context=ex.context,
                    answers=list(ex.answers),
                    tags=ex.tags | {f"source:{ds.name}"},
                )
            )
    return QADataset(name=name, examples=examples)  # __post_init__ raises DuplicateQid


def split(ds: QADataset, test_fraction: float, seed: int) -> tuple[QADataset, QADataset]:
    """Deterministic train/test split.

    Examples that carry a ``doc:`` tag are grouped so no document straddles the
    split; untagged examples form singleton groups. The test side receives
    round(test_fraction * number_of_groups) groups (half-up).
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must be in (0, 1)")
    groups: dict[str, list[QAExample]] = {}
    for ex in ds.examples:
        groups.setdefault(ex.doc_tag() or f"qid:{ex.qid}", []).append(ex)
    keys = sorted(groups)
    random.Random(seed).shuffle(keys)
    n_test = int(test_fraction * len(keys) + 0.5)
    test_keys = set(keys[:n_test])

    train = [ex for ex in ds.examples if (ex.doc_tag() or f"qid:{ex.qid}") not in test_keys]
    test = [ex for ex in ds.examples if (ex.doc_tag() or f"qid:{ex.qid}") in test_keys]
    return (
        QADataset(name=f"{ds.name}:train", examples=train),
        QADataset(name=f"{ds.name}:test", examples=test),
    )


_MULTIRC_MARKUP = re.compile(r"<b>Sent \d+: </b>|<br>")


def convert_multirc(source: str | IO[str], ignore_case: bool = False, name: str = "multirc") -> QADataset:
    """Convert MultiRC-style multiple-choice records into extractive QA.

    A question is kept iff at least one of its correct answer options occurs
    verbatim in the passage (case-sensitive by default); each such option
    becomes a gold answer anchored at its first occurrence. Everything else is
    dropped; the drop count is the size difference from the input.
    """
    payload = _load_json(source)
    if not isinstance(payload, dict) or "data" not in payload:
        raise MalformedRecord("expected a top-level object with a 'data' list")
    examples: list[QAExample] = []
    for rec_idx, record in enumerate(payload["data"]):
        try:
            paragraph = record["paragraph"]
            passage = _MULTIRC_MARKUP.sub(" ", paragraph["text"])
            passage = re.sub(r"\s+", " ", passage).strip()
            questions = paragraph["questions"]
        except (KeyError, TypeError) as exc:
            raise MalformedRecord(f"record {rec_idx}: {exc}") from exc
        rec_id = record.get("id", str(rec_idx))
        for q_idx, question in enumerate(questions):
            try:
                q_text = question["question"]
                options = question["answers"]
            except (KeyError, TypeError) as exc:
                raise MalformedRecord(f"record {rec_idx} question {q_idx}: {exc}") from exc
            answers = []
            for option in options:
                if not option.get("isAnswer"):
                    continue
                text = option["text"]
                pos = (
                    passage.lower().find(text.lower()) if ignore_case else passage.find(text)
                )
                if pos < 0:
                    continue
                answers.append(Answer(passage[pos : pos + len(text)], pos))
            if answers:
                examples.append(
                    QAExample(
                        qid=f"{rec_id}:q{question.get('idx', q_idx)}",
                        question=q_text,
                        context=passage,
                        answers=answers,
                        tags={f"doc:{rec_id}"},
                    )
                )
    for ex in examples:
        ex.check()
    return QADataset(name=name, examples=examples)


def _answer_type(text: str) -> str:
    tokens = text.split()
    if not tokens:
        return "other"
    if all(re.fullmatch(r"[\d.,%$:/-]+", t) for t in tokens):
        return "numeric"
    if all(t.lower() in PRONOUNS for t in tokens):
        return "pronoun"
    if any(t[:1].isupper() for t in tokens):
        return "proper"
    return "nominal"


def stats(ds: QADataset) -> dict:
    """Example count, mean context length (chars), and answer-type histogram."""
    n = len(ds.examples)
    histogram: dict[str, int] = {}
    for ex in ds.examples:
        kind = _answer_type(ex.answers[0].text) if ex.answers else "other"
        histogram[kind] = histogram.get(kind, 0) + 1
    mean_context = sum(len(ex.context) for ex in ds.examples) / n if n else 0.0
    return {
        "name": ds.name,
        "example_count": n,
        "mean_context_chars": mean_context,
        "answer_types": dict(sorted(histogram.items())),
    }


def _load_json(source: str | IO[str]):
    if hasattr(source, "read"):
        return json.load(source)  # type: ignore[arg-type]
    text = str(source)
    if text.lstrip().startswith(("{", "[")):
        return json.loads(text)
    with open(text, encoding="utf-8") as handle:
        return json.load(handle)


def read_predictions(source: str | IO[str]) -> dict[str, str]:
    """Predictions file: one JSON object mapping qid -> answer string."""
    payload = _load_json(source)
    if not isinstance(payload, dict) or not all(isinstance(v, str) for v in payload.values()):
        raise MalformedRecord("predictions must be a JSON object of qid -> string")
    return dict(payload)


def subset(ds: QADataset, qids: Iterable[str], name: str | None = None) -> QADataset:
    wanted = set(qids)
    return QADataset(
        name=name or ds.name, examples=[ex for ex in ds.examples if ex.qid in wanted]
    )
