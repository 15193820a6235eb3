"""Passage ranking and guideline validation for annotation-driven curation.

Candidate passages are ranked by (distinct named entities, pronoun count):
many entities mean many candidate referents, many pronouns mean many
referring expressions with more informative antecedents. Drafted QA pairs
are checked against the annotation guideline: the answer mention must be
strictly more informative than the referring expression, and the two must
live in different sentences.
"""

from __future__ import annotations

import enum
import re
import string
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import metrics
from .lexicon import PRONOUNS
from .probes import SimilarityScorer, heuristic_person_entities, most_similar_sentence, split_sentences
from .qa_data import Answer, QAExample


class SpanOutOfRange(Exception):
    pass


class EmptyQuestion(Exception):
    pass


class MentionClass(enum.IntEnum):
    """Informativeness order: proper > nominal > pronoun."""

    PRONOUN = 0
    NOMINAL = 1
    PROPER = 2


def classify_mention(
    text: str,
    pos_tags: Sequence[str] | None = None,
    sentence_initial: bool = False,
    pronouns: frozenset[str] = PRONOUNS,
) -> MentionClass:
    """Classify a mention as pronoun, nominal, or proper.

    Pronoun when every token is in the pronoun lexicon. Proper when POS tags
    show NNP, or some token is capitalized beyond a lone sentence-initial
    capital. Everything else is nominal.
    """
    tokens = text.split()
    if not tokens:
        raise ValueError("empty mention text")
    if all(t.lower() in pronouns for t in tokens):
        return MentionClass.PRONOUN
    if pos_tags is not None:
        if any(tag.startswith("NNP") for tag in pos_tags):
            return MentionClass.PROPER
        return MentionClass.NOMINAL
    capitalized = [
        i for i, t in enumerate(tokens) if t.strip(string.punctuation)[:1].isupper()
    ]
    if capitalized and not (sentence_initial and capitalized == [0]):
        return MentionClass.PROPER
    return MentionClass.NOMINAL


@dataclass(frozen=True)
class Span:
    """Character span, end exclusive."""

    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"bad span ({self.start}, {self.end})")

    def text_in(self, passage: str) -> str:
        if self.end > len(passage):
            raise SpanOutOfRange(f"span ({self.start}, {self.end}) outside passage")
        return passage[self.start : self.end]


@dataclass
class Passage:
    passage_id: str
    text: str
    entities: list[tuple[Span, str]] = field(default_factory=list)  # (span, label)

    def entity_strings(self) -> list[str]:
        if self.entities:
            return [span.text_in(self.text) for span, _ in self.entities]
        fake = QAExample(qid=self.passage_id, question="", context=self.text, answers=[])
        return heuristic_person_entities(fake)


@dataclass(frozen=True)
class PassageScore:
    passage_id: str
    distinct_entity_count: int
    pronoun_count: int

    def rank_key(self, pronouns_first: bool = False) -> tuple[int, int]:
        if pronouns_first:
            return (self.pronoun_count, self.distinct_entity_count)
        return (self.distinct_entity_count, self.pronoun_count)

    def to_json(self) -> dict:
        return {
            "passage_id": self.passage_id,
            "distinct_entity_count": self.distinct_entity_count,
            "pronoun_count": self.pronoun_count,
        }


_WORD_RE = re.compile(r"[A-Za-z']+")


def pronoun_spans(text: str, pronouns: frozenset[str] = PRONOUNS) -> list[Span]:
    return [
        Span(m.start(), m.end()) for m in _WORD_RE.finditer(text) if m.group().lower() in pronouns
    ]


def rank_passages(
    passages: Sequence[Passage], pronouns_first: bool = False
) -> list[PassageScore]:
    """Deterministic total order: rank key descending, passage id breaking ties."""
    scores = []
    for passage in passages:
        distinct = {" ".join(metrics.normalize(e)) for e in passage.entity_strings()}
        distinct.discard("")
        scores.append(
            PassageScore(
                passage_id=passage.passage_id,
                distinct_entity_count=len(distinct),
                pronoun_count=len(pronoun_spans(passage.text)),
            )
        )
    scores.sort(key=lambda s: (tuple(-v for v in s.rank_key(pronouns_first)), s.passage_id))
    return scores


@dataclass
class DraftPair:
    passage_id: str
    question: str
    answer: Answer
    m1: Span
    m2: Span

    @classmethod
    def from_json(cls, payload: Mapping) -> "DraftPair":
        return cls(
            passage_id=str(payload["passage_id"]),
            question=str(payload.get("question", "")),
            answer=Answer(payload["answer"]["text"], int(payload["answer"]["answer_start"])),
            m1=Span(int(payload["m1"]["start"]), int(payload["m1"]["end"])),
            m2=Span(int(payload["m2"]["start"]), int(payload["m2"]["end"])),
        )

    def to_json(self) -> dict:
        return {
            "passage_id": self.passage_id,
            "question": self.question,
            "answer": {"text": self.answer.text, "answer_start": self.answer.answer_start},
            "m1": {"start": self.m1.start, "end": self.m1.end},
            "m2": {"start": self.m2.start, "end": self.m2.end},
        }


RULE_NAMES = (
    "different_sentence",
    "informativeness",
    "answer_in_passage",
    "answer_equals_m2",
    "non_duplicate",
)


@dataclass
class RuleResult:
    passed: bool
    message: str = ""

    def to_json(self) -> dict:
        return {"passed": self.passed, "message": self.message}


@dataclass
class ValidationReport:
    rules: dict[str, RuleResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rules.values())

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "rules": {name: result.to_json() for name, result in self.rules.items()},
        }

    @classmethod
    def from_json(cls, payload: Mapping) -> "ValidationReport":
        return cls(
            rules={
                name: RuleResult(bool(r["passed"]), r.get("message", ""))
                for name, r in payload["rules"].items()
            }
        )


def _sentence_index_at(offset: int, sentences: list[tuple[str, int]]) -> int:
    for i, (text, start) in enumerate(sentences):
        if start <= offset < start + len(text):
            return i
    return -1


def _pair_key(question: str, answer_text: str) -> tuple[str, str]:
    return (" ".join(metrics.normalize(question)), " ".join(metrics.normalize(answer_text)))


def validate_pair(
    draft: DraftPair,
    passage: Passage,
    existing: Sequence[DraftPair] = (),
) -> ValidationReport:
    """Check a drafted pair against the annotation guideline.

    Raises SpanOutOfRange when a span exceeds the passage; everything else is
    reported as per-rule pass/fail.
    """
    text = passage.text
    m1_text = draft.m1.text_in(text)
    m2_text = draft.m2.text_in(text)
    if draft.answer.answer_start + len(draft.answer.text) > len(text):
        raise SpanOutOfRange("answer span outside passage")

    sentences = split_sentences(text)
    s1 = _sentence_index_at(draft.m1.start, sentences)
    s2 = _sentence_index_at(draft.m2.start, sentences)
    different_sentence = RuleResult(
        passed=s1 != s2 and s1 >= 0 and s2 >= 0,
        message=f"m1 in sentence {s1}, m2 in sentence {s2}",
    )

    c1 = classify_mention(m1_text, sentence_initial=_starts_sentence(draft.m1.start, sentences))
    c2 = classify_mention(m2_text, sentence_initial=_starts_sentence(draft.m2.start, sentences))
    informativeness = RuleResult(
        passed=c2 > c1,
        message=f"m2 is {c2.name.lower()}, m1 is {c1.name.lower()}",
    )

    try:
        draft.answer.check(text)
        answer_in_passage = RuleResult(True, "answer matches its offset")
    except Exception as exc:  # noqa: BLE001 - reported, not raised
        answer_in_passage = RuleResult(False, str(exc))

    answer_equals_m2 = RuleResult(
        passed=draft.answer.answer_start == draft.m2.start and draft.answer.text == m2_text,
        message=f"answer {draft.answer.text!r} vs m2 {m2_text!r}",
    )

    key = _pair_key(draft.question, draft.answer.text)
    duplicate = any(_pair_key(p.question, p.answer.text) == key for p in existing)
    non_duplicate = RuleResult(
        passed=not duplicate,
        message="duplicate of an existing pair" if duplicate else "no duplicate found",
    )

    return ValidationReport(
        rules={
            "different_sentence": different_sentence,
            "informativeness": informativeness,
            "answer_in_passage": answer_in_passage,
            "answer_equals_m2": answer_equals_m2,
            "non_duplicate": non_duplicate,
        }
    )


def _starts_sentence(offset: int, sentences: list[tuple[str, int]]) -> bool:
    return any(start == offset for _, start in sentences)


def bias_preview(draft: DraftPair, passage: Passage, scorer: SimilarityScorer) -> dict:
    """Warn when the drafted answer sits in the question's most similar sentence."""
    if not draft.question.strip():
        raise EmptyQuestion("cannot preview bias for an empty question")
    index, offset, sentence = most_similar_sentence(draft.question, passage.text, scorer)
    lo, hi = offset, offset + len(sentence)
    inside = lo <= draft.answer.answer_start and (
        draft.answer.answer_start + len(draft.answer.text) <= hi
    )
    return {
        "most_similar_sentence": sentence,
        "sentence_index": index,
        "answer_in_most_similar": inside,
    }
