import json

import pytest

from coref2qa import qa_data
from coref2qa.cli import main
from coref2qa.conll import ColumnMap, serialize_conll

from conftest import build_planted_corpus


@pytest.fixture
def table2_conll(tmp_path, mother_doc, chain_doc):
    path = tmp_path / "table2.conll"
    path.write_text(serialize_conll([mother_doc, chain_doc], ColumnMap.compact()), encoding="utf-8")
    return path


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_convert_dec_golden(tmp_path, table2_conll, capsys):
    out = tmp_path / "dec.json"
    code, _, _ = run(
        capsys,
        "convert", "--mode", "dec", "--in", str(table2_conll),
        "--columns", "compact", "--out", str(out),
    )
    assert code == 0
    ds = qa_data.read_squad_json(str(out))
    questions = {e.question for e in ds.examples}
    assert "She was at Huntingdon because <ref> she </ref> needed care ." in questions
    assert "The angel tied the dragon with <ref> the chain </ref> for 1000 years ." in questions


def test_convert_idempotent_byte_identical(tmp_path, table2_conll, capsys):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    for out in (out1, out2):
        code, _, _ = run(
            capsys,
            "convert", "--mode", "rule", "--in", str(table2_conll),
            "--columns", "compact", "--out", str(out),
        )
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_convert_jobs_parallel_same_output(tmp_path, table2_conll, capsys):
    serial, parallel = tmp_path / "s.json", tmp_path / "p.json"
    run(capsys, "convert", "--mode", "dec", "--in", str(table2_conll),
        "--columns", "compact", "--out", str(serial))
    run(capsys, "convert", "--mode", "dec", "--in", str(table2_conll),
        "--columns", "compact", "--jobs", "4", "--out", str(parallel))
    assert serial.read_bytes() == parallel.read_bytes()


def write_dataset(tmp_path, name="ds.json"):
    ds, _ = build_planted_corpus()
    path = tmp_path / name
    path.write_text(qa_data.write_squad_json(ds), encoding="utf-8")
    return path, ds


def test_score_gold_as_predictions_100(tmp_path, capsys):
    ds_path, ds = write_dataset(tmp_path)
    preds = {e.qid: e.answers[0].text for e in ds.examples}
    preds_path = tmp_path / "preds.json"
    preds_path.write_text(json.dumps(preds), encoding="utf-8")
    code, out, _ = run(capsys, "score", "--in", str(ds_path), "--preds", str(preds_path))
    assert code == 0
    report = json.loads(out)
    assert report["f1"] == 100.0 and report["em"] == 100.0


def test_probe_report_bootstrap_deterministic(tmp_path, capsys):
    ds_path, ds = write_dataset(tmp_path)
    flags_path = tmp_path / "flags.json"
    code, _, _ = run(
        capsys,
        "probe", "--probe", "semoverlap", "--in", str(ds_path), "--out", str(flags_path),
    )
    assert code == 0
    outputs = []
    for _ in range(2):
        code, out, _ = run(
            capsys,
            "report", "--in", str(ds_path), "--flags", str(flags_path),
            "--bootstrap", "10,100,7",
        )
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1]
    report = json.loads(outputs[0])
    assert report["ratios"]["semantic_overlap"] == 30.0
    assert report["bootstrap_params"] == {"k": 10, "s": 100, "seed": 7}


def test_probe_randomne_with_entities(tmp_path, capsys):
    ds_path, ds = write_dataset(tmp_path)
    _, entities = build_planted_corpus()
    entities_path = tmp_path / "entities.json"
    entities_path.write_text(json.dumps(entities), encoding="utf-8")
    code, out, _ = run(
        capsys,
        "probe", "--probe", "randomne", "--in", str(ds_path),
        "--entities", str(entities_path), "--seed", "3",
    )
    assert code == 0
    flags = json.loads(out)
    assert sum(1 for tags in flags.values() if "random_ne" in tags) == 20


def test_transform_shortctx_reports_drops(tmp_path, capsys):
    ds_path, _ = write_dataset(tmp_path)
    out_path = tmp_path / "short.json"
    code, out, _ = run(
        capsys,
        "transform", "--probe", "shortctx", "--in", str(ds_path), "--out", str(out_path),
    )
    assert code == 0
    assert json.loads(out.splitlines()[-1]) == {"kept": 70, "dropped": 130}


def test_flags_subsets_pipeline(tmp_path, capsys):
    ds_path, ds = write_dataset(tmp_path)
    gold = {e.qid: e.answers[0].text for e in ds.examples}
    half = {e.qid: (e.answers[0].text if i % 2 == 0 else "") for i, e in enumerate(ds.examples)}
    gold_path, half_path = tmp_path / "gold.json", tmp_path / "half.json"
    gold_path.write_text(json.dumps(gold), encoding="utf-8")
    half_path.write_text(json.dumps(half), encoding="utf-8")

    flags_path = tmp_path / "flags.json"
    code, _, _ = run(
        capsys,
        "flags", "--in", str(ds_path), "--preds", str(half_path),
        "--tag", "short_distance", "--out", str(flags_path),
    )
    assert code == 0
    code, out, _ = run(
        capsys,
        "subsets", "--in", str(ds_path), "--flags", str(flags_path),
        "--baseline", str(half_path), "--variant", str(gold_path),
    )
    assert code == 0
    deltas = {d["subset"]: d for d in json.loads(out)}
    assert deltas["short_distance"]["delta"] == 0.0
    assert deltas["not_short_distance"]["delta"] == 100.0


def test_merge_and_split_and_stats(tmp_path, capsys):
    a = qa_data.QADataset("A", [
        qa_data.QAExample(f"a{i}", "q?", "John ran.", [qa_data.Answer("John", 0)])
        for i in range(6)
    ])
    b = qa_data.QADataset("B", [
        qa_data.QAExample(f"b{i}", "q?", "She hid.", [qa_data.Answer("She", 0)])
        for i in range(4)
    ])
    pa, pb = tmp_path / "a.json", tmp_path / "b.json"
    pa.write_text(qa_data.write_squad_json(a), encoding="utf-8")
    pb.write_text(qa_data.write_squad_json(b), encoding="utf-8")
    merged_path = tmp_path / "m.json"
    code, _, _ = run(capsys, "merge", "--in", str(pa), str(pb), "--name", "AB",
                     "--out", str(merged_path))
    assert code == 0

    code, out, _ = run(capsys, "stats", "--in", str(merged_path))
    assert code == 0
    assert json.loads(out)["example_count"] == 10

    train_path, test_path = tmp_path / "train.json", tmp_path / "test.json"
    code, out, _ = run(
        capsys,
        "split", "--in", str(merged_path), "--fraction", "0.2", "--seed", "5",
        "--out-train", str(train_path), "--out-test", str(test_path),
    )
    assert code == 0
    sizes = json.loads(out)
    assert sizes == {"train": 8, "test": 2, "seed": 5}


def test_multirc_convert_cli(tmp_path, capsys):
    payload = {
        "data": [
            {
                "id": "r",
                "paragraph": {
                    "text": "Paris hosts the Louvre. People visit daily.",
                    "questions": [
                        {"question": "What does Paris host?",
                         "answers": [{"text": "the Louvre", "isAnswer": True}]},
                        {"question": "Nice?",
                         "answers": [{"text": "very nice indeed", "isAnswer": True}]},
                    ],
                },
            }
        ]
    }
    src = tmp_path / "multirc.json"
    src.write_text(json.dumps(payload), encoding="utf-8")
    out_path = tmp_path / "out.json"
    code, out, _ = run(capsys, "multirc-convert", "--in", str(src), "--out", str(out_path))
    assert code == 0
    assert json.loads(out.splitlines()[-1]) == {"kept": 1}


def test_rank_and_validate_cli(tmp_path, capsys):
    corpus = {
        "passages": [
            {"id": "p1", "text": "John Motteux sailed in June. Later his estate was sold."},
            {"id": "p2", "text": "the rain fell. it kept falling."},
        ]
    }
    corpus_path = tmp_path / "corpus.json"
    corpus_path.write_text(json.dumps(corpus), encoding="utf-8")
    code, out, _ = run(capsys, "rank", "--passages", str(corpus_path))
    assert code == 0
    assert [p["passage_id"] for p in json.loads(out)] == ["p1", "p2"]

    text = corpus["passages"][0]["text"]
    draft = {
        "passage_id": "p1",
        "question": "Whose estate was sold?",
        "answer": {"text": "John Motteux", "answer_start": 0},
        "m1": {"start": text.index("his"), "end": text.index("his") + 3},
        "m2": {"start": 0, "end": 12},
    }
    pairs_path = tmp_path / "pairs.jsonl"
    pairs_path.write_text(json.dumps(draft) + "\n", encoding="utf-8")
    code, out, _ = run(capsys, "validate", "--passages", str(corpus_path),
                       "--pairs", str(pairs_path))
    assert code == 0
    (report,) = json.loads(out)
    assert report["passed"] is True


def test_config_file_provides_defaults(tmp_path, capsys):
    ds_path, _ = write_dataset(tmp_path)
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"probe": "semoverlap", "in": str(ds_path)}), encoding="utf-8")
    code, out, _ = run(capsys, "probe", "--config", str(config_path))
    assert code == 0
    assert json.loads(out)
    # explicit flags win over config values
    code2, out2, _ = run(capsys, "probe", "--config", str(config_path), "--probe", "semoverlap")
    assert code2 == 0 and out2 == out


def test_usage_error_exit_1(tmp_path, capsys):
    code, _, err = run(capsys, "convert", "--mode", "bogus", "--in", "x")
    assert code == 1
    assert json.loads(err)["error"] == "UsageError"


def test_data_error_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.conll"
    bad.write_text("#begin document (x); part 000\ntok NN * (0\n\n#end document\n", encoding="utf-8")
    code, _, err = run(capsys, "convert", "--mode", "dec", "--in", str(bad),
                       "--columns", "compact")
    assert code == 2
    assert json.loads(err)["error"] == "UnbalancedBracket"


def test_missing_file_exit_2(capsys):
    code, _, err = run(capsys, "stats", "--in", "/nonexistent/ds.json")
    assert code == 2
    assert json.loads(err)["error"] == "FileNotFoundError"


def test_external_unreachable_exit_3(tmp_path, table2_conll, capsys):
    code, _, err = run(
        capsys,
        "convert", "--mode", "external", "--in", str(table2_conll), "--columns", "compact",
        "--qg-endpoint", "http://127.0.0.1:1", "--timeout", "0.2", "--retries", "1",
    )
    assert code == 3
    assert json.loads(err)["error"] == "ServiceUnavailable"
