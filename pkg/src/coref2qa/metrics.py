"""Answer normalization, token-overlap F1 / exact match, and subset deltas.

Token F1 counts shared words between a prediction and each gold answer as a
multiset overlap (repeats count), takes the best gold, and is averaged over
examples. Normalization lowercases, strips punctuation characters, drops the
articles a/an/the, and splits on whitespace.
"""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .lexicon import ARTICLES
from .qa_data import QADataset, QAExample


class UnknownQid(Exception):
    pass


_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def normalize(s: str) -> list[str]:
    """Lowercase, strip punctuation chars, drop articles, split on whitespace."""
    stripped = s.lower().translate(_PUNCT_TABLE)
    return [t for t in stripped.split() if t not in ARTICLES]


def token_f1(pred: str, golds: Iterable[str]) -> float:
    """Best bag-of-tokens F1 of the prediction against any gold answer."""
    pred_tokens = normalize(pred)
    best = 0.0
    for gold in golds:
        gold_tokens = normalize(gold)
        if not pred_tokens and not gold_tokens:
            best = max(best, 1.0)
            continue
        overlap = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
        if overlap == 0:
            continue
        precision = overlap / len(pred_tokens)
        recall = overlap / len(gold_tokens)
        best = max(best, 2 * precision * recall / (precision + recall))
    return best


def exact_match(pred: str, golds: Iterable[str]) -> float:
    pred_tokens = normalize(pred)
    return float(any(pred_tokens == normalize(g) for g in golds))


def gold_strings(example: QAExample) -> list[str]:
    """Gold answer texts to score against.

    Discontinuous golds are represented as multiple answers; scoring also
    admits their space-joined concatenation so span-only predictors are not
    punished by the representation.
    """
    texts = [a.text for a in example.answers]
    if len(texts) > 1:
        texts.append(" ".join(texts))
    return texts


@dataclass
class ScoreReport:
    f1: float
    em: float
    n: int
    per_example: dict[str, tuple[float, float]]
    missing: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "f1": self.f1,
            "em": self.em,
            "n": self.n,
            "missing": self.missing,
            "per_example": {qid: {"f1": f, "em": e} for qid, (f, e) in self.per_example.items()},
        }


def evaluate(ds: QADataset, predictions: Mapping[str, str]) -> ScoreReport:
    """Mean token F1 / EM (x100) of a qid->answer prediction map over a dataset.

    A qid absent from the predictions scores 0 and is listed in ``missing``.
    A prediction for a qid not in the dataset raises UnknownQid.
    """
    known = {ex.qid for ex in ds.examples}
    stray = sorted(set(predictions) - known)
    if stray:
        raise UnknownQid(f"predictions for unknown qid(s): {stray[:5]}")

    per_example: dict[str, tuple[float, float]] = {}
    missing: list[str] = []
    for ex in ds.examples:
        if ex.qid not in predictions:
            missing.append(ex.qid)
            per_example[ex.qid] = (0.0, 0.0)
            continue
        golds = gold_strings(ex)
        pred = predictions[ex.qid]
        per_example[ex.qid] = (token_f1(pred, golds), exact_match(pred, golds))

    n = len(ds.examples)
    mean_f1 = 100.0 * sum(f for f, _ in per_example.values()) / n if n else 0.0
    mean_em = 100.0 * sum(e for _, e in per_example.values()) / n if n else 0.0
    return ScoreReport(f1=mean_f1, em=mean_em, n=n, per_example=per_example, missing=missing)


@dataclass(frozen=True)
class SubsetDelta:
    subset_name: str
    n: int
    baseline_f1: float
    variant_f1: float

    @property
    def delta(self) -> float:
        return self.variant_f1 - self.baseline_f1

    def to_json(self) -> dict:
        return {
            "subset": self.subset_name,
            "n": self.n,
            "baseline_f1": self.baseline_f1,
            "variant_f1": self.variant_f1,
            "delta": self.delta,
        }


def subset_analysis(
    ds: QADataset,
    flags: Mapping[str, set[str]],
    baseline_preds: Mapping[str, str],
    variant_preds: Mapping[str, str],
) -> list[SubsetDelta]:
    """Per-bias-tag F1 deltas between two prediction sets.

    For every tag in ``flags`` the dataset is split into the flagged subset and
    its complement; both predictions are scored on each. Empty subsets are
    reported with n=0 and zero scores.
    """
    tags = sorted({t for tag_set in flags.values() for t in tag_set})
    deltas: list[SubsetDelta] = []
    for tag in tags:
        flagged = [ex for ex in ds.examples if tag in flags.get(ex.qid, set())]
        rest = [ex for ex in ds.examples if tag not in flags.get(ex.qid, set())]
        for name, subset in ((tag, flagged), (f"not_{tag}", rest)):
            if not subset:
                deltas.append(SubsetDelta(name, 0, 0.0, 0.0))
                continue
            sub_ds = QADataset(name=f"{ds.name}:{name}", examples=subset)
            base = evaluate(sub_ds, {q: baseline_preds.get(q, "") for q in (e.qid for e in subset)})
            var = evaluate(sub_ds, {q: variant_preds.get(q, "") for q in (e.qid for e in subset)})
            deltas.append(SubsetDelta(name, len(subset), base.f1, var.f1))
    return deltas
