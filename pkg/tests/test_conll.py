import random

import pytest

from coref2qa import conll
from coref2qa.conll import (
    ColumnMap,
    CorefCluster,
    Document,
    DuplicateDocId,
    MalformedRow,
    MentionSpan,
    OutOfRange,
    Token,
    UnbalancedBracket,
    mention_text,
    parse_conll,
    serialize_conll,
)

from conftest import random_document

COMPACT = ColumnMap.compact()


def roundtrip(text: str, cmap: ColumnMap = COMPACT):
    docs = parse_conll(text, cmap)
    again = parse_conll(serialize_conll(docs, cmap), cmap)
    assert again == docs
    return docs


def test_empty_document_block():
    docs = parse_conll("#begin document (empty); part 000\n#end document\n", COMPACT)
    assert len(docs) == 1
    assert docs[0].sentences == []
    assert docs[0].clusters == []
    assert docs[0].entities == []


def test_empty_document_roundtrip_byte_identical():
    text = "#begin document (empty); part 000\n#end document\n"
    assert serialize_conll(parse_conll(text, COMPACT), COMPACT) == text


def test_bracket_stack_single_cluster():
    text = (
        "#begin document (synth); part 000\n"
        "tok0 NN * (0\n"
        "tok1 NN * 0)\n"
        "tok2 NN * -\n"
        "tok3 NN * (0)\n"
        "\n"
        "#end document\n"
    )
    (doc,) = roundtrip(text)
    (cluster,) = doc.clusters
    assert cluster.cluster_id == 0
    assert [(m.start_token, m.end_token) for m in cluster.mentions] == [(0, 1), (3, 3)]


def test_mother_passage_cluster(mother_doc):
    text = serialize_conll([mother_doc], COMPACT)
    (doc,) = parse_conll(text, COMPACT)
    (cluster,) = doc.clusters
    mentions = [mention_text(doc, m) for m in cluster.mentions]
    assert mentions == ["My mother", "She", "She", "she"]
    assert cluster.mentions[0].end_token - cluster.mentions[0].start_token + 1 == 2


def test_overlapping_clusters_pipe_joined():
    doc = Document(
        doc_id="overlap",
        part=0,
        sentences=[[Token(0, "a", "DT"), Token(1, "b", "NN"), Token(2, "c", "NN")]],
        clusters=[
            CorefCluster(0, [MentionSpan(0, 0, 1, 0)]),
            CorefCluster(1, [MentionSpan(0, 1, 2, 1), MentionSpan(0, 1, 1, 1)]),
        ],
    )
    text = serialize_conll([doc], COMPACT)
    assert "|" in text
    (again,) = parse_conll(text, COMPACT)
    assert again.clusters == doc.clusters


def test_nested_same_cluster_mentions():
    doc = Document(
        doc_id="nest",
        part=0,
        sentences=[[Token(i, t, "NN") for i, t in enumerate("w x y z".split())]],
        clusters=[CorefCluster(2, [MentionSpan(0, 0, 3, 2), MentionSpan(0, 1, 2, 2)])],
    )
    (again,) = parse_conll(serialize_conll([doc], COMPACT), COMPACT)
    assert [(m.start_token, m.end_token) for m in again.clusters[0].mentions] == [(0, 3), (1, 2)]


def test_adjacent_same_cluster_mentions_share_token():
    doc = Document(
        doc_id="adj",
        part=0,
        sentences=[[Token(0, "x", "NN"), Token(1, "y", "NN"), Token(2, "z", "NN")]],
        clusters=[CorefCluster(5, [MentionSpan(0, 0, 1, 5), MentionSpan(0, 1, 2, 5)])],
    )
    (again,) = parse_conll(serialize_conll([doc], COMPACT), COMPACT)
    assert [(m.start_token, m.end_token) for m in again.clusters[0].mentions] == [(0, 1), (1, 2)]


def test_named_entity_spans():
    text = (
        "#begin document (ne); part 000\n"
        "John NNP (PERSON* (0\n"
        "Smith NNP *) 0)\n"
        "works VBZ * -\n"
        "at IN * -\n"
        "Acme NNP (ORG) -\n"
        "\n"
        "#end document\n"
    )
    (doc,) = roundtrip(text)
    assert doc.entities == [
        conll.NamedEntitySpan(0, 0, 1, "PERSON"),
        conll.NamedEntitySpan(0, 4, 4, "ORG"),
    ]


def test_unbalanced_open_reports_line():
    text = (
        "#begin document (bad); part 000\n"
        "tok0 NN * (0\n"
        "tok1 NN * -\n"
        "\n"
        "#end document\n"
    )
    with pytest.raises(UnbalancedBracket) as err:
        parse_conll(text, COMPACT)
    assert err.value.line_no == 4


def test_close_without_open():
    text = "#begin document (bad); part 000\ntok0 NN * 7)\n\n#end document\n"
    with pytest.raises(UnbalancedBracket):
        parse_conll(text, COMPACT)


def test_mention_across_sentence_boundary_rejected():
    text = (
        "#begin document (cross); part 000\n"
        "tok0 NN * (3\n"
        "\n"
        "tok1 NN * 3)\n"
        "\n"
        "#end document\n"
    )
    with pytest.raises(UnbalancedBracket):
        parse_conll(text, COMPACT)


def test_malformed_row_too_few_columns():
    text = "#begin document (short); part 000\ntok0 NN\n\n#end document\n"
    with pytest.raises(MalformedRow) as err:
        parse_conll(text, COMPACT)
    assert err.value.line_no == 2


def test_duplicate_doc_id():
    block = "#begin document (dup); part 001\ntok0 NN * -\n\n#end document\n"
    with pytest.raises(DuplicateDocId):
        parse_conll(block + block, COMPACT)


def test_mention_text_examples(mother_doc, chain_doc):
    assert mention_text(mother_doc, MentionSpan(0, 0, 1, 0)) == "My mother"
    assert mention_text(mother_doc, MentionSpan(2, 5, 5, 0)) == "she"
    assert mention_text(chain_doc, MentionSpan(1, 6, 7, 0)) == "the chain"


def test_mention_text_out_of_range(mother_doc):
    with pytest.raises(OutOfRange):
        mention_text(mother_doc, MentionSpan(0, 0, 99, 0))
    with pytest.raises(OutOfRange):
        mention_text(mother_doc, MentionSpan(9, 0, 0, 0))


def test_default_column_map_conll2012_layout():
    row = "bn/abc/00/abc_0001 0 0 Thousands NNS (TOP* - - - Speaker1 * (0)"
    text = f"#begin document (bn/abc/00/abc_0001); part 000\n{row}\n\n#end document\n"
    (doc,) = parse_conll(text)
    assert doc.sentences[0][0].text == "Thousands"
    assert doc.sentences[0][0].pos == "NNS"
    assert doc.clusters[0].mentions == [MentionSpan(0, 0, 0, 0)]
    # opaque columns (speaker, parse) survive the round-trip
    (again,) = parse_conll(serialize_conll([doc]))
    assert again == doc
    assert "Speaker1" in serialize_conll([doc])


def test_cluster_mentions_sorted_document_order():
    rng = random.Random(5)
    for i in range(20):
        doc = random_document(rng, i)
        for cluster in doc.clusters:
            keys = [(m.sentence_index, m.start_token, m.end_token) for m in cluster.mentions]
            assert keys == sorted(keys)


def test_randomized_roundtrip_property():
    rng = random.Random(1234)
    for i in range(100):
        doc = random_document(rng, i)
        text = serialize_conll([doc], COMPACT)
        first = parse_conll(text, COMPACT)
        second = parse_conll(serialize_conll(first, COMPACT), COMPACT)
        assert first == second, f"round-trip drift on generated doc {i}"


def test_bracket_balance_property():
    rng = random.Random(99)
    docs = [random_document(rng, i) for i in range(40)]
    text = serialize_conll(docs, COMPACT)
    opens = {}
    closes = {}
    for line in text.splitlines():
        if line.startswith("#") or not line.strip():
            continue
        cell = line.split()[COMPACT.coref]
        if cell == "-":
            continue
        for item in cell.split("|"):
            cid = int(item.strip("()"))
            if item.startswith("(") and item.endswith(")"):
                opens[cid] = opens.get(cid, 0) + 1
                closes[cid] = closes.get(cid, 0) + 1
            elif item.startswith("("):
                opens[cid] = opens.get(cid, 0) + 1
            else:
                closes[cid] = closes.get(cid, 0) + 1
    assert opens == closes
