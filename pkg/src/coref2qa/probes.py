"""Dataset-artifact probes.

Five probes over an extractive QA dataset, following the same recipe: build a
degraded view of the data (or a heuristic solver), decide per example whether
it is solvable that way, and report the flagged ratio.

* random named entity: a seeded uniform draw among the context's PERSON
  entities counts as solved when it reaches the F1 threshold.
* wh-word: questions reduced to their interrogative words only.
* empty question: questions blanked entirely.
* semantic overlap: the gold answer lies inside the context sentence most
  similar to the question.
* short-distance reasoning: the context reduced to that most-similar
  sentence; examples it cannot contain are dropped.

The wh-word / empty-question / short-context probes produce *training*
variants for an external model; its predictions on the unchanged dev set come
back through ``score_probe_predictions``. The similarity scorer behind the
overlap probes is TF-IDF cosine by default, with an embedding-service client
as the drop-in neural alternative.
"""

from __future__ import annotations

import math
import random
import re
import string
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Protocol, Sequence

from . import metrics
from .http_client import JsonPostClient, MalformedResponse
from .lexicon import WH_WORDS
from .qa_data import Answer, QADataset, QAExample

PROBE_NAMES = (
    "random_ne",
    "wh_word",
    "empty_question",
    "semantic_overlap",
    "short_distance",
)


class EmptyContext(Exception):
    pass


class SubsetTooLarge(Exception):
    pass


# --- sentence segmentation ---------------------------------------------------

# titles, latinisms, and single initials; lowercased, period included
DEFAULT_ABBREVIATIONS = frozenset(
    {
        "mr.", "mrs.", "ms.", "dr.", "prof.", "rev.", "gen.", "rep.", "sen.",
        "gov.", "capt.", "col.", "lt.", "maj.", "sgt.", "st.", "jr.", "sr.",
        "vs.", "etc.", "e.g.", "i.e.", "cf.", "inc.", "ltd.", "co.", "corp.",
        "no.", "vol.", "fig.", "approx.",
    }
    | {f"{c}." for c in string.ascii_lowercase}
)

_BOUNDARY_RE = re.compile(r"[.!?]+")


def split_sentences(
    context: str, abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS
) -> list[tuple[str, int]]:
    """Rule-based sentence segmentation returning (sentence, char offset) pairs.

    Splits after ``. ! ?`` runs followed by whitespace and an uppercase letter,
    quote, or digit, unless the word ending at the punctuation is a known
    abbreviation. Sentences are exact slices of the context: joining them with
    the intervening whitespace reproduces it.
    """
    if not context.strip():
        return []
    boundaries: list[int] = []  # index one past the punctuation run
    for match in _BOUNDARY_RE.finditer(context):
        end = match.end()
        if end >= len(context):
            break
        after = context[end:]
        stripped = after.lstrip()
        if len(stripped) == len(after) or not stripped:
            continue  # needs whitespace after the punctuation
        if stripped[0] not in "\"'“”‘’(" and not stripped[0].isupper() and not stripped[0].isdigit():
            continue
        word_start = max(
            context.rfind(" ", 0, match.start()), context.rfind("\n", 0, match.start())
        )
        word = context[word_start + 1 : end].lower()
        if word in abbreviations:
            continue
        boundaries.append(end)

    sentences: list[tuple[str, int]] = []
    start = len(context) - len(context.lstrip())
    for boundary in boundaries:
        sentences.append((context[start:boundary], start))
        rest = context[boundary:]
        start = boundary + (len(rest) - len(rest.lstrip()))
    tail = context[start:].rstrip()
    if tail:
        sentences.append((tail, start))
    return sentences


# --- similarity scorers -------------------------------------------------------


class SimilarityScorer(Protocol):
    def scores(self, question: str, sentences: Sequence[str]) -> list[float]:
        ...


def _cosine(a: dict[str, float], b: dict[str, float]) -> float:
    if not a or not b:
        return 0.0
    dot = sum(weight * b[token] for token, weight in a.items() if token in b)
    if dot == 0.0:
        return 0.0
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    return dot / (norm_a * norm_b)


class TfidfScorer:
    """TF-IDF cosine over normalized tokens, IDF fit on a sentence corpus.

    Deterministic; a sentence containing the question verbatim scores the
    maximum attainable cosine of 1.0 against that question.
    """

    def __init__(self, corpus_sentences: Iterable[str] = ()):
        self._df: Counter[str] = Counter()
        self._n_docs = 0
        for sentence in corpus_sentences:
            self.add(sentence)

    def add(self, sentence: str) -> None:
        self._n_docs += 1
        self._df.update(set(metrics.normalize(sentence)))

    @classmethod
    def fit(cls, ds: QADataset) -> "TfidfScorer":
        scorer = cls()
        for context in dict.fromkeys(ex.context for ex in ds.examples):
            for sentence, _ in split_sentences(context):
                scorer.add(sentence)
        return scorer

    def _idf(self, token: str) -> float:
        return math.log((1 + self._n_docs) / (1 + self._df.get(token, 0))) + 1.0

    def _vector(self, text: str) -> dict[str, float]:
        counts = Counter(metrics.normalize(text))
        return {tok: tf * self._idf(tok) for tok, tf in counts.items()}

    def score(self, question: str, sentence: str) -> float:
        return _cosine(self._vector(question), self._vector(sentence))

    def scores(self, question: str, sentences: Sequence[str]) -> list[float]:
        q_vec = self._vector(question)
        return [_cosine(q_vec, self._vector(s)) for s in sentences]


class EmbeddingServiceScorer:
    """Similarity via an external sentence-embedding service.

    Wire format: POST {"texts": [...]} -> {"vectors": [[...], ...]}; cosine is
    computed locally. The question is sent as the first text of each batch.
    """

    def __init__(self, endpoint: str, timeout: float = 10.0, retries: int = 3):
        self._client = JsonPostClient(endpoint=endpoint, timeout=timeout, retries=retries)

    def _embed(self, texts: Sequence[str]) -> list[list[float]]:
        body = self._client.post({"texts": list(texts)})
        vectors = body.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise MalformedResponse(f"{self._client.endpoint}: bad 'vectors' field")
        return vectors

    def scores(self, question: str, sentences: Sequence[str]) -> list[float]:
        if not sentences:
            return []
        vectors = self._embed([question, *sentences])
        q_vec, rest = vectors[0], vectors[1:]
        q_map = {str(i): v for i, v in enumerate(q_vec) if v}
        return [_cosine(q_map, {str(i): v for i, v in enumerate(s) if v}) for s in rest]

    def score(self, question: str, sentence: str) -> float:
        return self.scores(question, [sentence])[0]


def most_similar_sentence(
    question: str, context: str, scorer: SimilarityScorer
) -> tuple[int, int, str]:
    """(index, char offset, text) of the argmax sentence; earliest index wins ties."""
    sentences = split_sentences(context)
    if not sentences:
        raise EmptyContext("context has no sentences")
    scores = scorer.scores(question, [s for s, _ in sentences])
    best = max(range(len(sentences)), key=lambda i: (scores[i], -i))
    text, offset = sentences[best]
    return best, offset, text


# --- probes and transforms ----------------------------------------------------


def probe_semantic_overlap(ds: QADataset, scorer: SimilarityScorer | None = None) -> set[str]:
    """Qids whose gold answer lies entirely inside the most question-similar sentence."""
    scorer = scorer or TfidfScorer.fit(ds)
    flagged: set[str] = set()
    for ex in ds.examples:
        sentences = split_sentences(ex.context)
        if not sentences:
            continue
        _, offset, text = most_similar_sentence(ex.question, ex.context, scorer)
        lo, hi = offset, offset + len(text)
        for answer in ex.answers:
            if lo <= answer.answer_start and answer.answer_start + len(answer.text) <= hi:
                flagged.add(ex.qid)
                break
    return flagged


EntitySource = Callable[[QAExample], Sequence[str]]


def tagged_entity_source(table: Mapping[str, Sequence[str]]) -> EntitySource:
    """Entity source backed by an explicit qid -> PERSON strings table."""
    return lambda ex: table.get(ex.qid, ())


_CAP_WORD = re.compile(r"^[A-Z][A-Za-z.'-]*$")


def heuristic_person_entities(example: QAExample) -> list[str]:
    """Capitalized-run fallback when no entity annotations are available.

    Maximal runs of capitalized words, excluding runs that consist only of a
    sentence-initial word. Distinct strings, in first-occurrence order.
    """
    found: dict[str, None] = {}
    for sentence, _ in split_sentences(example.context):
        tokens = sentence.split()
        run: list[str] = []
        run_start = 0
        for i, raw in enumerate(tokens + [""]):
            word = raw.strip(string.punctuation)
            if word and _CAP_WORD.match(word):
                if not run:
                    run_start = i
                run.append(word)
            else:
                if run and not (run_start == 0 and len(run) == 1):
                    found[" ".join(run)] = None
                run = []
    return list(found)


def probe_random_ne(
    ds: QADataset,
    entity_source: EntitySource,
    seed: int = 0,
    threshold: float = 0.8,
) -> set[str]:
    """Seeded uniform PERSON-entity draw per example, flagged when F1 >= threshold.

    The RNG is seeded per example from (seed, qid) so flags do not depend on
    dataset order. Examples without PERSON entities are never flagged.
    """
    flagged: set[str] = set()
    for ex in ds.examples:
        entities = list(entity_source(ex))
        if not entities:
            continue
        rng = random.Random(f"{seed}:{ex.qid}")
        pick = entities[rng.randrange(len(entities))]
        if metrics.token_f1(pick, metrics.gold_strings(ex)) >= threshold:
            flagged.add(ex.qid)
    return flagged


def transform_wh_only(ds: QADataset, wh_lexicon: frozenset[str] = WH_WORDS) -> QADataset:
    """Questions reduced to their wh-words (lowercased, original order)."""
    examples = []
    for ex in ds.examples:
        wh_tokens = [
            w for t in ex.question.split() if (w := t.strip(string.punctuation).lower()) in wh_lexicon
        ]
        examples.append(
            QAExample(
                qid=ex.qid,
                question=" ".join(wh_tokens),
                context=ex.context,
                answers=list(ex.answers),
                tags=set(ex.tags),
            )
        )
    return QADataset(name=f"{ds.name}:whword", examples=examples)


def transform_empty_question(ds: QADataset) -> QADataset:
    """All questions blanked; contexts and answers untouched."""
    examples = [
        QAExample(
            qid=ex.qid, question="", context=ex.context, answers=list(ex.answers), tags=set(ex.tags)
        )
        for ex in ds.examples
    ]
    return QADataset(name=f"{ds.name}:empty", examples=examples)


def transform_short_context(ds: QADataset, scorer: SimilarityScorer | None = None) -> QADataset:
    """Contexts reduced to the most question-similar sentence.

    Gold answers are re-anchored inside that sentence; answers it does not
    contain are removed, and examples left with no gold answer are dropped
    (the drop count is the size difference from the input).
    """
    scorer = scorer or TfidfScorer.fit(ds)
    examples: list[QAExample] = []
    for ex in ds.examples:
        if not split_sentences(ex.context):
            continue
        _, offset, sentence = most_similar_sentence(ex.question, ex.context, scorer)
        kept: list[Answer] = []
        for answer in ex.answers:
            local = answer.answer_start - offset
            end = local + len(answer.text)
            if 0 <= local and end <= len(sentence) and sentence[local:end] == answer.text:
                kept.append(Answer(answer.text, local))  # same occurrence, shifted
            else:
                found = sentence.find(answer.text)
                if found >= 0:
                    kept.append(Answer(answer.text, found))
        if kept:
            examples.append(
                QAExample(
                    qid=ex.qid,
                    question=ex.question,
                    context=sentence,
                    answers=kept,
                    tags=set(ex.tags),
                )
            )
    return QADataset(name=f"{ds.name}:shortctx", examples=examples)


def score_probe_predictions(
    ds: QADataset, predictions: Mapping[str, str], threshold: float = 0.8, em: bool = False
) -> set[str]:
    """Qids an external model solved: token F1 (or EM) against gold >= threshold."""
    flagged: set[str] = set()
    for ex in ds.examples:
        pred = predictions.get(ex.qid)
        if pred is None:
            continue
        golds = metrics.gold_strings(ex)
        score = metrics.exact_match(pred, golds) if em else metrics.token_f1(pred, golds)
        if score >= threshold:
            flagged.add(ex.qid)
    return flagged


# --- flag assembly and reporting ----------------------------------------------


def collect_flags(ds: QADataset, per_probe: Mapping[str, set[str]]) -> dict[str, set[str]]:
    """Merge per-probe flagged-qid sets into a qid -> tags map (dataset qids only)."""
    known = {ex.qid for ex in ds.examples}
    flags: dict[str, set[str]] = {}
    for probe, qids in per_probe.items():
        for qid in qids & known:
            flags.setdefault(qid, set()).add(probe)
    return flags


def flags_to_json(flags: Mapping[str, set[str]]) -> dict[str, list[str]]:
    return {qid: sorted(tags) for qid, tags in sorted(flags.items())}


def flags_from_json(payload: Mapping[str, list[str]]) -> dict[str, set[str]]:
    return {qid: set(tags) for qid, tags in payload.items()}


@dataclass
class BootstrapSummary:
    mean: float
    min: float
    max: float
    ratios: list[float] = field(default_factory=list)


@dataclass
class BiasReport:
    n: int
    ratios: dict[str, float]
    counts: dict[str, int]
    bootstrap: dict[str, BootstrapSummary] | None = None
    bootstrap_params: tuple[int, int, int] | None = None  # (k, s, seed)

    def to_json(self) -> dict:
        payload: dict = {
            "n": self.n,
            "ratios": {k: v for k, v in sorted(self.ratios.items())},
            "counts": {k: v for k, v in sorted(self.counts.items())},
        }
        if self.bootstrap is not None:
            k, s, seed = self.bootstrap_params
            payload["bootstrap"] = {
                probe: {"mean": b.mean, "min": b.min, "max": b.max, "ratios": b.ratios}
                for probe, b in sorted(self.bootstrap.items())
            }
            payload["bootstrap_params"] = {"k": k, "s": s, "seed": seed}
        return payload


def bias_report(
    ds: QADataset,
    flags: Mapping[str, set[str]],
    bootstrap: tuple[int, int, int] | None = None,
) -> BiasReport:
    """Flagged-example ratios per probe tag, optionally with bootstrap bounds.

    ``bootstrap`` is (k, s, seed): k seeded subsets of s examples drawn without
    replacement; the report carries the mean/min/max ratio over them. s equal
    to the dataset size reproduces the exact ratios.
    """
    n = len(ds.examples)
    tags = sorted({t for tag_set in flags.values() for t in tag_set})
    counts = {
        tag: sum(1 for ex in ds.examples if tag in flags.get(ex.qid, set())) for tag in tags
    }
    ratios = {tag: 100.0 * c / n if n else 0.0 for tag, c in counts.items()}
    report = BiasReport(n=n, ratios=ratios, counts=counts)

    if bootstrap is not None:
        k, s, seed = bootstrap
        if s > n:
            raise SubsetTooLarge(f"subset size {s} exceeds dataset size {n}")
        rng = random.Random(seed)
        subsets = [rng.sample(range(n), s) for _ in range(k)]
        summaries: dict[str, BootstrapSummary] = {}
        for tag in tags:
            flagged = [1 if tag in flags.get(ex.qid, set()) else 0 for ex in ds.examples]
            sub_ratios = [100.0 * sum(flagged[i] for i in idx) / s for idx in subsets]
            summaries[tag] = BootstrapSummary(
                mean=sum(sub_ratios) / len(sub_ratios),
                min=min(sub_ratios),
                max=max(sub_ratios),
                ratios=sub_ratios,
            )
        report.bootstrap = summaries
        report.bootstrap_params = (k, s, seed)
    return report
