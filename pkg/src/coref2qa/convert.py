"""Coreference-to-QA conversion.

Three conversion modes over parsed coreference documents:

* ``dec``  - the anaphor's sentence becomes a declarative query with the
  anaphor wrapped in literal ``<ref> ... </ref>`` markers.
* ``rule`` - a deterministic subject-position question: when a cluster-mate
  of the anaphor starts its sentence, that mention is replaced by who/what,
  the sentence is lowercased, the terminal period stripped and "?" appended.
  Sentences with no subject-position mate are skipped, mirroring generators
  that cannot question every declarative sentence.
* ``external`` - the declarative query is shipped to a question-generation
  service and its reply is used verbatim.

In every mode the answer is the anaphor's closest non-pronominal antecedent,
anchored by character offset into the rendered document context. Pairs whose
anaphor and antecedent normalize to the same string are removed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from .conll import Document, MentionSpan, mention_text
from .http_client import JsonPostClient, MalformedResponse
from .lexicon import PERSON_PRONOUNS, PRONOUNS, is_pronominal
from .qa_data import Answer, QADataset, QAExample

Mode = Literal["dec", "rule", "external"]

REF_OPEN = "<ref>"
REF_CLOSE = "</ref>"


def normalized(text: str) -> str:
    """Identity comparison key: casefold + whitespace collapse."""
    return " ".join(text.split()).casefold()


@dataclass(frozen=True)
class ConversionTuple:
    qid: str
    doc_id: str
    query_or_question: str
    answer: Answer
    context: str
    anaphor: MentionSpan
    antecedent: MentionSpan
    mode: Mode

    def check(self, pronouns: frozenset[str] = PRONOUNS) -> None:
        ant = self.antecedent
        ana = self.anaphor
        if (ant.sentence_index, ant.start_token, ant.end_token) >= (
            ana.sentence_index,
            ana.start_token,
            ana.end_token,
        ):
            raise ValueError(f"{self.qid}: antecedent does not precede anaphor")
        if is_pronominal(self.answer.text, pronouns):
            raise ValueError(f"{self.qid}: pronominal answer {self.answer.text!r}")
        self.answer.check(self.context, self.qid)

    def anaphor_text(self, doc: Document) -> str:
        return mention_text(doc, self.anaphor)


def render_context(doc: Document) -> tuple[str, dict[tuple[int, int], int]]:
    """Whole-document context string plus a (sentence, token) -> char-start table.

    Tokens are joined by single spaces, sentences likewise; no punctuation
    reattachment, so offsets are stable and the join is reversible.
    """
    offsets: dict[tuple[int, int], int] = {}
    pieces: list[str] = []
    cursor = 0
    for s_idx, sentence in enumerate(doc.sentences):
        for token in sentence:
            offsets[(s_idx, token.index)] = cursor
            pieces.append(token.text)
            cursor += len(token.text) + 1  # trailing space or end
    return " ".join(pieces), offsets


def select_anaphors(
    doc: Document, pronouns: frozenset[str] = PRONOUNS
) -> list[tuple[MentionSpan, MentionSpan]]:
    """(anaphor, antecedent) pairs per cluster.

    Every mention after the first is paired with its nearest preceding
    cluster-mate whose text is not a pronoun; mentions without one are
    skipped, as are pairs whose two texts normalize identically. Exact
    duplicate mention spans inside a cluster contribute one pair.
    """
    pairs: list[tuple[MentionSpan, MentionSpan]] = []
    for cluster in doc.clusters:
        mentions: list[MentionSpan] = []
        for m in cluster.mentions:
            if m not in mentions:
                mentions.append(m)
        for i, anaphor in enumerate(mentions[1:], start=1):
            antecedent = None
            for candidate in reversed(mentions[:i]):
                if not is_pronominal(mention_text(doc, candidate), pronouns):
                    antecedent = candidate
                    break
            if antecedent is None:
                continue
            if normalized(mention_text(doc, anaphor)) == normalized(mention_text(doc, antecedent)):
                continue
            pairs.append((anaphor, antecedent))
    return pairs


def build_dec_query(doc: Document, anaphor: MentionSpan) -> str:
    """The anaphor's sentence with <ref> markers around the anaphor tokens."""
    tokens = [t.text for t in doc.sentences[anaphor.sentence_index]]
    marked = (
        tokens[: anaphor.start_token]
        + [REF_OPEN]
        + tokens[anaphor.start_token : anaphor.end_token + 1]
        + [REF_CLOSE]
        + tokens[anaphor.end_token + 1 :]
    )
    return " ".join(marked)


_ATTACH_LEFT = set(",.;:!?%)]}") | {"''", "...", "”", "’"}
_ATTACH_RIGHT = set("([{$") | {"``", "“", "‘"}
_CONTRACTIONS = {"'s", "'re", "'ll", "'ve", "'m", "'d", "n't"}


def detokenize(tokens: list[str]) -> str:
    """Join tokens with natural punctuation spacing.

    Straight single quotes alternate opening/closing by occurrence order.
    """
    pieces: list[str] = []
    glue_next = False
    quote_open = False
    for token in tokens:
        glue = glue_next
        glue_next = False
        if token == "'":
            if quote_open:
                glue = True
            else:
                glue_next = True
            quote_open = not quote_open
        elif token in _ATTACH_RIGHT:
            glue_next = True
        elif token in _ATTACH_LEFT or token.lower() in _CONTRACTIONS:
            glue = True
        if glue and pieces:
            pieces[-1] += token
        else:
            pieces.append(token)
    return " ".join(pieces)


def _strip_terminal_period(tokens: list[str]) -> list[str]:
    out = list(tokens)
    if out and out[-1] == ".":
        out.pop()
    elif len(out) >= 2 and out[-1] in {"'", '"', "''", "’", "”"} and out[-2] == ".":
        del out[-2]
    return out


def _cluster_is_person(doc: Document, cluster_id: int) -> bool:
    cluster = doc.cluster_by_id(cluster_id)
    for mention in cluster.mentions:
        if mention_text(doc, mention).lower() in PERSON_PRONOUNS:
            return True
    person_spans = [e for e in doc.entities if e.label == "PERSON"]
    for mention in cluster.mentions:
        for ent in person_spans:
            if (
                ent.sentence_index == mention.sentence_index
                and ent.start_token <= mention.end_token
                and mention.start_token <= ent.end_token
            ):
                return True
    return False


def rule_generate_question(
    doc: Document, anaphor: MentionSpan, antecedent: MentionSpan
) -> str | None:
    """Deterministic wh-question from a subject-position cluster-mate, else None.

    The wh-word is "who" when the cluster shows person evidence (a person
    pronoun among its mentions, or overlap with a PERSON entity), else "what".
    """
    cluster = doc.cluster_by_id(anaphor.cluster_id)
    subject = None
    for mention in cluster.mentions:
        if mention.sentence_index == anaphor.sentence_index and mention.start_token == 0:
            subject = mention
            break
    if subject is None:
        return None
    wh = "who" if _cluster_is_person(doc, anaphor.cluster_id) else "what"
    tokens = [t.text for t in doc.sentences[anaphor.sentence_index]]
    tokens = [wh] + tokens[subject.end_token + 1 :]
    tokens = _strip_terminal_period(tokens)
    return detokenize(tokens).lower() + "?"


class QGClient:
    """Client for an external question-generation service.

    Wire format: POST {"query", "mention_start", "mention_end"} ->
    {"question": string}. An empty question means the service declined.
    """

    def __init__(self, endpoint: str, timeout: float = 10.0, retries: int = 3):
        self._client = JsonPostClient(endpoint=endpoint, timeout=timeout, retries=retries)

    def generate(self, query: str, mention_start: int, mention_end: int) -> str:
        body = self._client.post(
            {"query": query, "mention_start": mention_start, "mention_end": mention_end}
        )
        if "question" not in body or not isinstance(body["question"], str):
            raise MalformedResponse(f"{self._client.endpoint}: missing 'question' field")
        return body["question"]


def external_generate_question(
    client: QGClient, doc: Document, anaphor: MentionSpan
) -> str | None:
    """Ask the service to question the declarative query; None when it declines."""
    query = build_dec_query(doc, anaphor)
    text = mention_text(doc, anaphor)
    start = query.index(REF_OPEN) + len(REF_OPEN) + 1
    question = client.generate(query, start, start + len(text))
    return question or None


def convert_tuples(
    docs: list[Document],
    mode: Mode,
    qg_client: QGClient | None = None,
    pronouns: frozenset[str] = PRONOUNS,
) -> list[ConversionTuple]:
    if mode not in ("dec", "rule", "external"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "external" and qg_client is None:
        raise ValueError("external mode needs a question-generation client")

    tuples: list[ConversionTuple] = []
    for doc in docs:
        context, offsets = render_context(doc)
        for anaphor, antecedent in select_anaphors(doc, pronouns):
            if mode == "dec":
                question = build_dec_query(doc, anaphor)
            elif mode == "rule":
                question = rule_generate_question(doc, anaphor, antecedent)
            else:
                question = external_generate_question(qg_client, doc, anaphor)
            if question is None:
                continue
            answer = Answer(
                text=mention_text(doc, antecedent),
                answer_start=offsets[(antecedent.sentence_index, antecedent.start_token)],
            )
            qid = (
                f"{doc.doc_id}.p{doc.part}.c{anaphor.cluster_id}"
                f".s{anaphor.sentence_index}.t{anaphor.start_token}-{anaphor.end_token}.{mode}"
            )
            tuples.append(
                ConversionTuple(
                    qid=qid,
                    doc_id=doc.doc_id,
                    query_or_question=question,
                    answer=answer,
                    context=context,
                    anaphor=anaphor,
                    antecedent=antecedent,
                    mode=mode,
                )
            )
    tuples.sort(key=lambda t: t.qid)
    return tuples


def convert(
    docs: list[Document],
    mode: Mode,
    qg_client: QGClient | None = None,
    name: str | None = None,
) -> QADataset:
    """One QA example per surviving (anaphor, antecedent) pair, qid-sorted."""
    examples = [
        QAExample(
            qid=t.qid,
            question=t.query_or_question,
            context=t.context,
            answers=[t.answer],
            tags={f"doc:{t.doc_id}", f"mode:{t.mode}"},
        )
        for t in convert_tuples(docs, mode, qg_client)
    ]
    return QADataset(name=name or f"conll_{mode}", examples=examples)
