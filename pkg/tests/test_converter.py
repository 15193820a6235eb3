import json
import random
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from coref2qa import convert
from coref2qa.conll import MentionSpan, mention_text
from coref2qa.http_client import ServiceUnavailable
from coref2qa.lexicon import is_pronominal

from conftest import make_doc, random_document


def test_render_context_empty():
    doc = make_doc("empty", [], {})
    context, offsets = convert.render_context(doc)
    assert context == ""
    assert offsets == {}


def test_render_context_two_tokens():
    doc = make_doc("two", [["He", "ran"]], {})
    context, offsets = convert.render_context(doc)
    assert context == "He ran"
    assert offsets == {(0, 0): 0, (0, 1): 3}


def test_render_context_mother_prefix(mother_doc):
    context, offsets = convert.render_context(mother_doc)
    assert context.startswith("My mother was Thelma Wahl .")
    assert offsets[(0, 0)] == 0
    assert offsets[(2, 0)] == context.index("She was at Huntingdon")


def test_select_anaphors_mother(mother_doc):
    pairs = convert.select_anaphors(mother_doc)
    assert len(pairs) == 3
    assert all(mention_text(mother_doc, ant) == "My mother" for _, ant in pairs)


def test_select_anaphors_chain(chain_doc):
    pairs = convert.select_anaphors(chain_doc)
    assert [
        (mention_text(chain_doc, a), mention_text(chain_doc, b)) for a, b in pairs
    ] == [("the chain", "a large chain")]


def test_select_anaphors_identical_filter():
    doc = make_doc(
        "ident",
        [["the", "chain", "held", "."], ["the", "chain", "broke", "."]],
        {0: [(0, 0, 1), (1, 0, 1)]},
    )
    assert convert.select_anaphors(doc) == []


def test_select_anaphors_case_insensitive_identical():
    doc = make_doc(
        "case",
        [["Big", "Dog", "ran", "."], ["big", "dog", "hid", "."]],
        {0: [(0, 0, 1), (1, 0, 1)]},
    )
    assert convert.select_anaphors(doc) == []


def test_select_anaphors_all_pronoun_cluster_skipped():
    doc = make_doc("pron", [["He", "saw", "him", "."]], {0: [(0, 0, 0), (0, 2, 2)]})
    assert convert.select_anaphors(doc) == []


def test_build_dec_query_mother(mother_doc):
    anaphor = MentionSpan(2, 5, 5, 0)
    assert (
        convert.build_dec_query(mother_doc, anaphor)
        == "She was at Huntingdon because <ref> she </ref> needed care ."
    )


def test_build_dec_query_chain(chain_doc):
    anaphor = MentionSpan(1, 6, 7, 0)
    assert (
        convert.build_dec_query(chain_doc, anaphor)
        == "The angel tied the dragon with <ref> the chain </ref> for 1000 years ."
    )


def test_build_dec_query_sentence_initial():
    doc = make_doc("init", [["She", "hid", "."]], {0: [(0, 0, 0)]})
    assert convert.build_dec_query(doc, MentionSpan(0, 0, 0, 0)) == "<ref> She </ref> hid ."


def test_rule_question_mother(mother_doc):
    question = convert.rule_generate_question(
        mother_doc, MentionSpan(2, 5, 5, 0), MentionSpan(0, 0, 1, 0)
    )
    assert question == "who was at huntingdon because she needed care?"


def test_rule_question_clinton(clinton_doc):
    question = convert.rule_generate_question(
        clinton_doc, MentionSpan(1, 2, 2, 0), MentionSpan(0, 8, 9, 0)
    )
    assert question == "who says he will come to washington, 'every now and then'?"


def test_rule_question_skips_without_subject_mate(chain_doc):
    assert (
        convert.rule_generate_question(
            chain_doc, MentionSpan(1, 6, 7, 0), MentionSpan(0, 4, 6, 0)
        )
        is None
    )


def test_rule_question_what_for_non_person():
    doc = make_doc(
        "what",
        [["The", "report", "vanished", "."], ["The", "document", "was", "lost", "."]],
        {0: [(0, 0, 1), (1, 0, 1)]},
    )
    question = convert.rule_generate_question(doc, MentionSpan(1, 0, 1, 0), MentionSpan(0, 0, 1, 0))
    assert question == "what was lost?"


def test_detokenize_quotes_and_commas():
    tokens = "washington , ' every now and then '".split()
    assert convert.detokenize(tokens) == "washington, 'every now and then'"


def test_convert_dec_mother(mother_doc):
    ds = convert.convert([mother_doc], "dec")
    questions = {(e.question, e.answers[0].text) for e in ds.examples}
    assert (
        "She was at Huntingdon because <ref> she </ref> needed care .",
        "My mother",
    ) in questions
    for ex in ds.examples:
        ex.check()


def test_convert_rule_clinton(clinton_doc):
    ds = convert.convert([clinton_doc], "rule")
    questions = {(e.question, e.answers[0].text) for e in ds.examples}
    assert (
        "who says he will come to washington, 'every now and then'?",
        "Bill Clinton",
    ) in questions


def test_convert_singleton_only_empty():
    doc = make_doc("single", [["John", "ran", "."]], {0: [(0, 0, 0)]})
    assert len(convert.convert([doc], "dec")) == 0


def test_convert_deterministic_qids(mother_doc, chain_doc):
    a = convert.convert([mother_doc, chain_doc], "dec")
    b = convert.convert([chain_doc, mother_doc], "dec")
    assert [e.qid for e in a.examples] == [e.qid for e in b.examples]
    assert [e.question for e in a.examples] == [e.question for e in b.examples]


def test_dec_count_at_least_rule_count():
    rng = random.Random(21)
    docs = [random_document(rng, i) for i in range(30)]
    dec = convert.convert_tuples(docs, "dec")
    rule = convert.convert_tuples(docs, "rule")
    assert len(dec) >= len(rule)


def test_conversion_tuple_invariants_randomized():
    rng = random.Random(31)
    docs = [random_document(rng, i) for i in range(40)]
    for mode in ("dec", "rule"):
        tuples = convert.convert_tuples(docs, mode)
        qids = [t.qid for t in tuples]
        assert len(qids) == len(set(qids))
        for t in tuples:
            t.check()
            doc = next(d for d in docs if d.doc_id == t.doc_id)
            assert convert.normalized(mention_text(doc, t.anaphor)) != convert.normalized(
                t.answer.text
            )
            assert not is_pronominal(t.answer.text)


# --- external question-generation service ---------------------------------------


class _StubQG(BaseHTTPRequestHandler):
    question = "who held the chain?"
    fail_times = 0
    calls = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).calls.append(body)
        if type(self).fail_times > 0:
            type(self).fail_times -= 1
            self.send_response(503)
            self.end_headers()
            return
        payload = json.dumps({"question": type(self).question}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def qg_server():
    server = HTTPServer(("127.0.0.1", 0), _StubQG)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubQG.question = "who held the chain?"
    _StubQG.fail_times = 0
    _StubQG.calls = []
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def test_external_mode_uses_service_reply(qg_server, chain_doc):
    client = convert.QGClient(qg_server, timeout=5, retries=2)
    ds = convert.convert([chain_doc], "external", qg_client=client)
    assert [e.question for e in ds.examples] == ["who held the chain?"]
    sent = _StubQG.calls[0]
    assert "<ref> the chain </ref>" in sent["query"]
    assert sent["query"][sent["mention_start"] : sent["mention_end"]] == "the chain"


def test_external_empty_reply_skips(qg_server, chain_doc):
    _StubQG.question = ""
    client = convert.QGClient(qg_server, timeout=5, retries=2)
    ds = convert.convert([chain_doc], "external", qg_client=client)
    assert len(ds) == 0


def test_external_retries_through_transient_errors(qg_server, chain_doc):
    _StubQG.fail_times = 2
    client = convert.QGClient(qg_server, timeout=5, retries=3)
    ds = convert.convert([chain_doc], "external", qg_client=client)
    assert len(ds) == 1


def test_external_unreachable_raises_service_unavailable(chain_doc):
    client = convert.QGClient("http://127.0.0.1:1", timeout=0.2, retries=2)
    with pytest.raises(ServiceUnavailable):
        convert.convert([chain_doc], "external", qg_client=client)
