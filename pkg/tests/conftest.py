"""Shared fixtures: hand-encoded passages, random document generation, and the
planted-bias corpus used by the acceptance suite."""

from __future__ import annotations

import random

import pytest

from coref2qa import conll
from coref2qa.qa_data import Answer, QADataset, QAExample


def make_doc(doc_id, sentences, clusters, entities=(), part=0, pos_tags=None):
    """Build a Document from token-string sentences and span tuples.

    clusters: {cluster_id: [(sentence, start, end), ...]}
    entities: [(sentence, start, end, label), ...]
    """
    doc_sentences = []
    for s_idx, sentence in enumerate(sentences):
        tags = pos_tags[s_idx] if pos_tags else ["XX"] * len(sentence)
        doc_sentences.append(
            [conll.Token(i, text, tags[i]) for i, text in enumerate(sentence)]
        )
    doc_clusters = [
        conll.CorefCluster(cid, [conll.MentionSpan(s, a, b, cid) for (s, a, b) in spans])
        for cid, spans in clusters.items()
    ]
    doc_entities = [conll.NamedEntitySpan(s, a, b, label) for (s, a, b, label) in entities]
    return conll.Document(
        doc_id=doc_id,
        part=part,
        sentences=doc_sentences,
        clusters=doc_clusters,
        entities=doc_entities,
    )


@pytest.fixture
def mother_doc():
    """The Thelma Wahl passage: cluster [My mother, She, She, she]."""
    return make_doc(
        "mother",
        [
            "My mother was Thelma Wahl .".split(),
            "She was a very good mother .".split(),
            "She was at Huntingdon because she needed care .".split(),
        ],
        {0: [(0, 0, 1), (1, 0, 0), (2, 0, 0), (2, 5, 5)]},
        entities=[(0, 3, 4, "PERSON")],
    )


@pytest.fixture
def chain_doc():
    """The angel/chain passage: cluster [a large chain, the chain]."""
    return make_doc(
        "chain",
        [
            "The angel also held a large chain in his hand .".split(),
            "The angel tied the dragon with the chain for 1000 years .".split(),
        ],
        {0: [(0, 4, 6), (1, 6, 7)]},
    )


@pytest.fixture
def clinton_doc():
    """The Bill Clinton passage, cropped to the sentences whose closest
    non-pronominal antecedent is the full name."""
    return make_doc(
        "clinton",
        [
            "After George W. Bush is sworn in , Bill Clinton will head to New York .".split(),
            "He says he will come to Washington , ' every now and then . '".split(),
        ],
        {0: [(0, 8, 9), (1, 0, 0), (1, 2, 2)]},
        entities=[(0, 1, 3, "PERSON"), (0, 8, 9, "PERSON")],
    )


VOCAB = ["alpha", "bravo", "charlie", "delta", "echo", "fox", "golf", "hotel", "india", "jazz"]
POS = ["NN", "VB", "DT", "JJ", "PRP"]
NE_LABELS = ["PERSON", "ORG", "GPE", "DATE"]


def _non_crossing(spans):
    """Drop spans that partially overlap an already-kept span in the same sentence."""
    kept = []
    for span in sorted(set(spans)):
        s, a, b = span
        ok = True
        for ks, ka, kb in kept:
            if ks != s:
                continue
            disjoint = a > kb or ka > b
            nested = (a >= ka and b <= kb) or (ka >= a and kb <= b)
            if not (disjoint or nested):
                ok = False
                break
        if ok:
            kept.append(span)
    return kept


def random_document(rng: random.Random, index: int) -> conll.Document:
    """Random document with nested and overlapping mentions plus NE spans."""
    n_sents = rng.randint(1, 4)
    sentences = [
        [rng.choice(VOCAB) for _ in range(rng.randint(1, 9))] for _ in range(n_sents)
    ]
    pos_tags = [[rng.choice(POS) for _ in sent] for sent in sentences]

    clusters = {}
    for cid in range(rng.randint(0, 4)):
        raw = []
        for _ in range(rng.randint(1, 4)):
            s = rng.randrange(n_sents)
            a = rng.randrange(len(sentences[s]))
            b = min(len(sentences[s]) - 1, a + rng.randint(0, 3))
            raw.append((s, a, b))
        spans = _non_crossing(raw)
        if spans:
            clusters[cid] = spans

    entities = []
    for s in range(n_sents):
        occupied = []
        for _ in range(rng.randint(0, 2)):
            a = rng.randrange(len(sentences[s]))
            b = min(len(sentences[s]) - 1, a + rng.randint(0, 2))
            if all(b < oa or a > ob for oa, ob in occupied):
                occupied.append((a, b))
                entities.append((s, a, b, rng.choice(NE_LABELS)))

    return make_doc(f"synth/{index}", sentences, clusters, entities, part=index % 3, pos_tags=pos_tags)


# --- planted-bias corpus --------------------------------------------------------

PLANTED_N = 200
PLANTED_OVERLAP = 60        # answer span inside the most-similar sentence
PLANTED_SURVIVORS = 70      # overlap examples + 10 whose answer text recurs there
PLANTED_NE_SOLVABLE = 20    # entity table contains exactly the gold answer


def build_planted_corpus() -> tuple[QADataset, dict[str, list[str]]]:
    """200 examples with exactly 30% semantic-overlap, 35% short-context
    survivors, and 10% random-NE-solvable examples, plus the PERSON table.

    Each context has three sentences with disjoint content vocabulary and a
    question that repeats the middle sentence verbatim, so the TF-IDF argmax
    is always sentence 1.
    """
    examples = []
    entity_table: dict[str, list[str]] = {}
    for i in range(PLANTED_N):
        s0 = f"Karl{i} visited the museum on Friday."
        s2 = f"Pers{i} rested near camp{i} afterwards."
        if i < PLANTED_OVERLAP:
            s1 = f"The explorer token{i} carried beacon{i} through the storm."
            answer_text = f"beacon{i}"
        elif i < PLANTED_SURVIVORS:
            # answer text occurs in the argmax sentence, gold span sits in s2
            s1 = f"The explorer token{i} carried beacon{i} toward camp{i}."
            answer_text = f"camp{i}"
        else:
            s1 = f"The explorer token{i} carried beacon{i} through the storm."
            answer_text = f"camp{i}"
        context = f"{s0} {s1} {s2}"
        if i < PLANTED_OVERLAP:
            start = context.index(answer_text)
        else:
            start = context.rindex(answer_text)  # the occurrence inside s2
        qid = f"planted{i}"
        examples.append(
            QAExample(
                qid=qid,
                question=s1,
                context=context,
                answers=[Answer(answer_text, start)],
            )
        )
        if i % 10 == 0:
            entity_table[qid] = [answer_text]
        else:
            entity_table[qid] = [f"Zed{i}"]
    ds = QADataset(name="planted", examples=examples)
    for ex in ds.examples:
        ex.check()
    return ds, entity_table


@pytest.fixture(scope="session")
def planted_corpus():
    return build_planted_corpus()
