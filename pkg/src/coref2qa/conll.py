"""CoNLL-2012 column-format ingestion.

Parses ``#begin document``/``#end document`` blocks into a typed document
model (tokens, POS, named entities, coreference clusters) and serializes it
back losslessly. Mentions may nest and overlap across cluster ids; a mention
that crosses a sentence boundary is rejected as unbalanced, which matches the
format's own guarantees.

Unmodeled columns (speaker, parse bits, lemmas, framesets, ...) are kept as
opaque strings per token so that a parsed file round-trips; the NE and coref
cells inside those stored rows are canonicalized to "-" because they are
regenerated from the model on serialization.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, TextIO


class ConllError(Exception):
    """Base class for corpus ingestion failures."""


class UnbalancedBracket(ConllError):
    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class MalformedRow(ConllError):
    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateDocId(ConllError):
    pass


class OutOfRange(ConllError):
    pass


@dataclass(frozen=True)
class ColumnMap:
    """Positions of the modeled columns within a row.

    Negative indices count from the end of the row, like Python indexing.
    ``ne`` may be None for corpora without an entity layer. The default
    matches the CoNLL-2012 v4 layout (coreference in the last column).
    """

    word: int = 3
    pos: int = 4
    ne: int | None = 10
    coref: int = -1

    def min_columns(self) -> int:
        positive = [i for i in (self.word, self.pos, self.ne, self.coref) if i is not None and i >= 0]
        negative = [i for i in (self.word, self.pos, self.ne, self.coref) if i is not None and i < 0]
        need = max(positive, default=0) + 1
        if negative:
            # negative columns must resolve past every positive one
            need += max(-i for i in negative)
        return need

    @classmethod
    def compact(cls) -> "ColumnMap":
        """Four-column layout (word, POS, NE, coref) used by small fixtures."""
        return cls(word=0, pos=1, ne=2, coref=3)


@dataclass(frozen=True)
class Token:
    index: int
    text: str
    pos: str = ""

    def __post_init__(self):
        if not self.text:
            raise ValueError("token text must be non-empty")


@dataclass(frozen=True, order=True)
class MentionSpan:
    sentence_index: int
    start_token: int
    end_token: int
    cluster_id: int

    def __post_init__(self):
        if self.start_token > self.end_token:
            raise ValueError(f"mention start {self.start_token} > end {self.end_token}")


@dataclass(frozen=True)
class NamedEntitySpan:
    sentence_index: int
    start_token: int
    end_token: int
    label: str

    def __post_init__(self):
        if self.start_token > self.end_token:
            raise ValueError(f"entity start {self.start_token} > end {self.end_token}")


@dataclass
class CorefCluster:
    cluster_id: int
    mentions: list[MentionSpan]

    def __post_init__(self):
        if not self.mentions:
            raise ValueError(f"cluster {self.cluster_id} has no mentions")
        if any(m.cluster_id != self.cluster_id for m in self.mentions):
            raise ValueError(f"cluster {self.cluster_id} contains foreign mentions")
        self.mentions = sorted(
            self.mentions, key=lambda m: (m.sentence_index, m.start_token, m.end_token)
        )


@dataclass
class Document:
    doc_id: str
    part: int
    sentences: list[list[Token]] = field(default_factory=list)
    clusters: list[CorefCluster] = field(default_factory=list)
    entities: list[NamedEntitySpan] = field(default_factory=list)
    # original row columns per token, with NE/coref cells wiped to "-"
    extras: list[list[tuple[str, ...]]] | None = None

    def cluster_by_id(self, cluster_id: int) -> CorefCluster:
        for cluster in self.clusters:
            if cluster.cluster_id == cluster_id:
                return cluster
        raise KeyError(cluster_id)

    def check_spans(self) -> None:
        spans: list[tuple[int, int, int]] = [
            (m.sentence_index, m.start_token, m.end_token)
            for c in self.clusters
            for m in c.mentions
        ]
        spans += [(e.sentence_index, e.start_token, e.end_token) for e in self.entities]
        for sent, start, end in spans:
            if sent >= len(self.sentences) or end >= len(self.sentences[sent]):
                raise OutOfRange(f"span ({sent}, {start}-{end}) outside document {self.doc_id}")


_BEGIN_RE = re.compile(r"#begin document \((?P<id>.*)\); part (?P<part>\d+)\s*$")
_NE_SINGLE_RE = re.compile(r"^\((?P<label>[^\s()*|]+)\)$")
_NE_OPEN_RE = re.compile(r"^\((?P<label>[^\s()*|]+)\*$")
_COREF_ITEM_RE = re.compile(r"^(?P<open>\()?(?P<id>\d+)(?P<close>\))?$")


def mention_text(doc: Document, mention: MentionSpan) -> str:
    """Space-joined surface text of a mention span."""
    if mention.sentence_index >= len(doc.sentences):
        raise OutOfRange(f"sentence {mention.sentence_index} outside document {doc.doc_id}")
    sentence = doc.sentences[mention.sentence_index]
    if mention.end_token >= len(sentence):
        raise OutOfRange(
            f"token {mention.end_token} outside sentence {mention.sentence_index}"
        )
    return " ".join(t.text for t in sentence[mention.start_token : mention.end_token + 1])


def parse_conll(source: str | TextIO | Iterable[str], column_map: ColumnMap | None = None) -> list[Document]:
    """Parse a CoNLL-2012-style stream into Documents.

    Raises UnbalancedBracket / MalformedRow with the offending line number and
    DuplicateDocId when two blocks share (doc id, part).
    """
    cmap = column_map or ColumnMap()
    lines = source.splitlines() if isinstance(source, str) else source

    docs: list[Document] = []
    seen: set[tuple[str, int]] = set()
    parser: _BlockParser | None = None
    line_no = 0

    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if line.startswith("#begin document"):
            match = _BEGIN_RE.match(line)
            if match is None:
                raise MalformedRow(f"bad begin line: {line!r}", line_no)
            parser = _BlockParser(match.group("id"), int(match.group("part")), cmap)
            continue
        if line.startswith("#end document"):
            if parser is None:
                raise MalformedRow("end without begin", line_no)
            doc = parser.finish(line_no)
            key = (doc.doc_id, doc.part)
            if key in seen:
                raise DuplicateDocId(f"duplicate document {doc.doc_id!r} part {doc.part}")
            seen.add(key)
            docs.append(doc)
            parser = None
            continue
        if parser is None:
            if line.strip() and not line.startswith("#"):
                raise MalformedRow("token row outside document block", line_no)
            continue
        if not line.strip():
            parser.end_sentence(line_no)
            continue
        if line.startswith("#"):
            continue
        parser.feed_row(line.split(), line_no)

    if parser is not None:
        raise MalformedRow("document block never closed", line_no)
    return docs


class _BlockParser:
    """Accumulates one begin/end block."""

    def __init__(self, doc_id: str, part: int, cmap: ColumnMap):
        self.doc_id = doc_id
        self.part = part
        self.cmap = cmap
        self.sentences: list[list[Token]] = []
        self.extras: list[list[tuple[str, ...]]] = []
        self.mentions: list[MentionSpan] = []
        self.entities: list[NamedEntitySpan] = []
        self._tokens: list[Token] = []
        self._rows: list[tuple[str, ...]] = []
        self._coref_open: dict[int, list[int]] = {}  # cluster id -> stack of start tokens
        self._ne_open: tuple[str, int] | None = None

    def feed_row(self, columns: list[str], line_no: int) -> None:
        if len(columns) < self.cmap.min_columns():
            raise MalformedRow(
                f"row has {len(columns)} columns, need at least {self.cmap.min_columns()}", line_no
            )
        token_index = len(self._tokens)
        word = columns[self.cmap.word]
        pos = columns[self.cmap.pos] if self.cmap.pos is not None else ""
        self._tokens.append(Token(index=token_index, text=word, pos=pos))

        if self.cmap.ne is not None:
            self._parse_ne(columns[self.cmap.ne], token_index, line_no)
        self._parse_coref(columns[self.cmap.coref], token_index, line_no)

        wiped = list(columns)
        if self.cmap.ne is not None:
            wiped[self.cmap.ne] = "-"
        wiped[self.cmap.coref] = "-"
        self._rows.append(tuple(wiped))

    def _parse_ne(self, cell: str, token_index: int, line_no: int) -> None:
        if cell in ("*", "-"):
            return
        single = _NE_SINGLE_RE.match(cell)
        if single:
            self.entities.append(
                NamedEntitySpan(len(self.sentences), token_index, token_index, single.group("label"))
            )
            return
        opened = _NE_OPEN_RE.match(cell)
        if opened:
            if self._ne_open is not None:
                raise UnbalancedBracket(
                    f"entity {opened.group('label')!r} opened inside open entity", line_no
                )
            self._ne_open = (opened.group("label"), token_index)
            return
        if cell == "*)":
            if self._ne_open is None:
                raise UnbalancedBracket("entity closed without open", line_no)
            label, start = self._ne_open
            self.entities.append(NamedEntitySpan(len(self.sentences), start, token_index, label))
            self._ne_open = None
            return
        raise MalformedRow(f"bad NE cell {cell!r}", line_no)

    def _parse_coref(self, cell: str, token_index: int, line_no: int) -> None:
        if cell == "-":
            return
        for item in cell.split("|"):
            match = _COREF_ITEM_RE.match(item)
            if match is None:
                raise MalformedRow(f"bad coreference item {item!r}", line_no)
            cluster_id = int(match.group("id"))
            opens, closes = bool(match.group("open")), bool(match.group("close"))
            if opens and closes:
                self.mentions.append(
                    MentionSpan(len(self.sentences), token_index, token_index, cluster_id)
                )
            elif opens:
                self._coref_open.setdefault(cluster_id, []).append(token_index)
            elif closes:
                stack = self._coref_open.get(cluster_id)
                if not stack:
                    raise UnbalancedBracket(f"cluster {cluster_id} closed without open", line_no)
                start = stack.pop()
                self.mentions.append(
                    MentionSpan(len(self.sentences), start, token_index, cluster_id)
                )

    def end_sentence(self, line_no: int) -> None:
        if not self._tokens:
            return
        self._check_balanced(line_no)
        self.sentences.append(self._tokens)
        self.extras.append(self._rows)
        self._tokens, self._rows = [], []

    def _check_balanced(self, line_no: int) -> None:
        open_ids = sorted(cid for cid, stack in self._coref_open.items() if stack)
        if open_ids:
            raise UnbalancedBracket(
                f"cluster(s) {open_ids} still open at sentence end", line_no
            )
        if self._ne_open is not None:
            raise UnbalancedBracket(
                f"entity {self._ne_open[0]!r} still open at sentence end", line_no
            )

    def finish(self, line_no: int) -> Document:
        self.end_sentence(line_no)
        by_id: dict[int, list[MentionSpan]] = {}
        for mention in self.mentions:
            by_id.setdefault(mention.cluster_id, []).append(mention)
        clusters = [CorefCluster(cid, ms) for cid, ms in sorted(by_id.items())]
        self.entities.sort(key=lambda e: (e.sentence_index, e.start_token, e.end_token))
        return Document(
            doc_id=self.doc_id,
            part=self.part,
            sentences=self.sentences,
            clusters=clusters,
            entities=self.entities,
            extras=self.extras,
        )


def serialize_conll(docs: list[Document], column_map: ColumnMap | None = None) -> str:
    """Render Documents back to the column format.

    ``parse_conll(serialize_conll(docs))`` reproduces the documents exactly on
    all modeled columns. Stored opaque rows are reused when present; documents
    built programmatically get minimal synthesized rows.
    """
    cmap = column_map or ColumnMap()
    out: list[str] = []
    for doc in docs:
        doc.check_spans()
        out.append(f"#begin document ({doc.doc_id}); part {doc.part:03d}")
        for sent_idx, sentence in enumerate(doc.sentences):
            ne_cells = _ne_cells(doc, sent_idx, len(sentence))
            coref_cells = _coref_cells(doc, sent_idx, len(sentence))
            for token in sentence:
                row = _base_row(doc, cmap, sent_idx, token)
                row[cmap.word] = token.text
                if cmap.pos is not None:
                    row[cmap.pos] = token.pos or "-"
                if cmap.ne is not None:
                    row[cmap.ne] = ne_cells[token.index]
                row[cmap.coref] = coref_cells[token.index]
                out.append(" ".join(row))
            out.append("")
        out.append("#end document")
    return "\n".join(out) + "\n"


def _base_row(doc: Document, cmap: ColumnMap, sent_idx: int, token: Token) -> list[str]:
    if doc.extras is not None:
        return list(doc.extras[sent_idx][token.index])
    width = cmap.min_columns()
    row = ["-"] * width
    # conventional leading identity columns when the layout leaves room
    if cmap.word >= 3:
        row[0], row[1], row[2] = doc.doc_id, str(doc.part), str(token.index)
    return row


def _ne_cells(doc: Document, sent_idx: int, n_tokens: int) -> list[str]:
    cells = ["*"] * n_tokens
    for ent in doc.entities:
        if ent.sentence_index != sent_idx:
            continue
        if ent.start_token == ent.end_token:
            cells[ent.start_token] = f"({ent.label})"
        else:
            cells[ent.start_token] = f"({ent.label}*"
            cells[ent.end_token] = "*)"
    return cells


def _coref_cells(doc: Document, sent_idx: int, n_tokens: int) -> list[str]:
    # closes before singles before opens so that nested same-id mentions
    # re-parse to the exact spans we serialized
    closes: list[list[tuple[int, int]]] = [[] for _ in range(n_tokens)]  # (-start, id)
    singles: list[list[int]] = [[] for _ in range(n_tokens)]
    opens: list[list[tuple[int, int]]] = [[] for _ in range(n_tokens)]  # (-end, id)
    for cluster in doc.clusters:
        for m in cluster.mentions:
            if m.sentence_index != sent_idx:
                continue
            if m.start_token == m.end_token:
                singles[m.start_token].append(m.cluster_id)
            else:
                opens[m.start_token].append((-m.end_token, m.cluster_id))
                closes[m.end_token].append((-m.start_token, m.cluster_id))
    cells = []
    for i in range(n_tokens):
        items = [f"{cid})" for _, cid in sorted(closes[i])]
        items += [f"({cid})" for cid in sorted(singles[i])]
        items += [f"({cid}" for _, cid in sorted(opens[i])]
        cells.append("|".join(items) if items else "-")
    return cells
