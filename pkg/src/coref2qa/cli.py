"""Command-line entry point exposing every pipeline stage for batch use.

All subcommands read and write the JSON formats defined by the library
modules. Errors are emitted as one machine-readable JSON object on stderr;
exit codes: 0 ok, 1 usage, 2 data error, 3 service error. Everything is
deterministic for fixed seeds; seeds are echoed into output metadata.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import conll, convert, curation, http_client, metrics, probes, qa_data, service

USAGE_EXIT, DATA_EXIT, SERVICE_EXIT = 1, 2, 3

DATA_ERRORS = (
    conll.ConllError,
    qa_data.QADataError,
    metrics.UnknownQid,
    probes.EmptyContext,
    probes.SubsetTooLarge,
    curation.SpanOutOfRange,
    curation.EmptyQuestion,
    ValueError,
    KeyError,
    FileNotFoundError,
    json.JSONDecodeError,
)
SERVICE_ERRORS = (http_client.ServiceError, service.BindError, service.StoreCorrupt, OSError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise UsageError(message)


def _emit(payload, out: str | None) -> None:
    text = json.dumps(payload, ensure_ascii=False, indent=1)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        print(text)


def _write_dataset(ds: qa_data.QADataset, out: str | None) -> None:
    text = qa_data.write_squad_json(ds)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        print(text)


def _read_dataset(path: str) -> qa_data.QADataset:
    return qa_data.read_squad_json(path, name=Path(path).stem)


def _column_map(spec: str) -> conll.ColumnMap:
    if spec == "conll2012":
        return conll.ColumnMap()
    if spec == "compact":
        return conll.ColumnMap.compact()
    word, pos, ne, coref = (int(x) if x != "none" else None for x in spec.split(","))
    return conll.ColumnMap(word=word, pos=pos, ne=ne, coref=coref)


def _scorer_for(ds: qa_data.QADataset, embed_endpoint: str | None) -> probes.SimilarityScorer:
    if embed_endpoint:
        return probes.EmbeddingServiceScorer(embed_endpoint)
    return probes.TfidfScorer.fit(ds)


def _load_flags(path: str) -> dict[str, set[str]]:
    with open(path, encoding="utf-8") as handle:
        return probes.flags_from_json(json.load(handle))


# --- subcommand handlers -------------------------------------------------------


def cmd_convert(args) -> int:
    cmap = _column_map(args.columns)
    with open(args.infile, encoding="utf-8") as handle:
        docs = conll.parse_conll(handle, cmap)
    client = None
    if args.mode == "external":
        if not args.qg_endpoint:
            raise UsageError("--qg-endpoint is required for --mode external")
        client = convert.QGClient(args.qg_endpoint, timeout=args.timeout, retries=args.retries)

    def one(doc):
        return convert.convert_tuples([doc], args.mode, client)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            tuple_lists = list(pool.map(one, docs))
    else:
        tuple_lists = [one(doc) for doc in docs]
    tuples = sorted((t for ts in tuple_lists for t in ts), key=lambda t: t.qid)
    examples = [
        qa_data.QAExample(
            qid=t.qid,
            question=t.query_or_question,
            context=t.context,
            answers=[t.answer],
            tags={f"doc:{t.doc_id}", f"mode:{t.mode}"},
        )
        for t in tuples
    ]
    ds = qa_data.QADataset(name=args.name or f"conll_{args.mode}", examples=examples)
    _write_dataset(ds, args.out)
    if args.out:
        print(json.dumps({"documents": len(docs), "examples": len(ds)}))
    return 0


def cmd_transform(args) -> int:
    ds = _read_dataset(args.infile)
    if args.probe == "whword":
        out = probes.transform_wh_only(ds)
    elif args.probe == "empty":
        out = probes.transform_empty_question(ds)
    else:
        out = probes.transform_short_context(ds, _scorer_for(ds, args.embed_endpoint))
    _write_dataset(out, args.out)
    if args.out:
        print(json.dumps({"kept": len(out), "dropped": len(ds) - len(out)}))
    return 0


def cmd_probe(args) -> int:
    ds = _read_dataset(args.infile)
    if args.probe == "randomne":
        if args.entities:
            with open(args.entities, encoding="utf-8") as handle:
                source = probes.tagged_entity_source(json.load(handle))
        else:
            source = probes.heuristic_person_entities
        flagged = probes.probe_random_ne(ds, source, seed=args.seed, threshold=args.threshold)
        tag = "random_ne"
    else:
        flagged = probes.probe_semantic_overlap(ds, _scorer_for(ds, args.embed_endpoint))
        tag = "semantic_overlap"
    flags = _load_flags(args.flags) if args.flags else {}
    for qid in flagged:
        flags.setdefault(qid, set()).add(tag)
    _emit(probes.flags_to_json(flags), args.out)
    return 0


def cmd_score(args) -> int:
    ds = _read_dataset(args.infile)
    predictions = qa_data.read_predictions(args.preds)
    report = metrics.evaluate(ds, predictions)
    _emit(report.to_json(), args.out)
    return 0


def cmd_flags(args) -> int:
    ds = _read_dataset(args.infile)
    predictions = qa_data.read_predictions(args.preds)
    flagged = probes.score_probe_predictions(ds, predictions, threshold=args.threshold, em=args.em)
    flags = _load_flags(args.flags) if args.flags else {}
    for qid in flagged:
        flags.setdefault(qid, set()).add(args.tag)
    _emit(probes.flags_to_json(flags), args.out)
    return 0


def cmd_report(args) -> int:
    ds = _read_dataset(args.infile)
    flags = _load_flags(args.flags)
    bootstrap = None
    if args.bootstrap:
        k, s, seed = (int(x) for x in args.bootstrap.split(","))
        bootstrap = (k, s, seed)
    report = probes.bias_report(ds, flags, bootstrap=bootstrap)
    _emit(report.to_json(), args.out)
    return 0


def cmd_subsets(args) -> int:
    ds = _read_dataset(args.infile)
    flags = _load_flags(args.flags)
    baseline = qa_data.read_predictions(args.baseline)
    variant = qa_data.read_predictions(args.variant)
    deltas = metrics.subset_analysis(ds, flags, baseline, variant)
    _emit([d.to_json() for d in deltas], args.out)
    return 0


def cmd_rank(args) -> int:
    passages = service.load_passages(args.passages)
    scores = curation.rank_passages(passages, pronouns_first=args.pronouns_first)
    _emit([s.to_json() for s in scores], args.out)
    return 0


def cmd_validate(args) -> int:
    passages = {p.passage_id: p for p in service.load_passages(args.passages)}
    accepted: list[curation.DraftPair] = []
    reports = []
    with open(args.pairs, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            draft = curation.DraftPair.from_json(json.loads(line))
            passage = passages.get(draft.passage_id)
            if passage is None:
                raise qa_data.MalformedRecord(
                    f"{args.pairs}:{line_no}: unknown passage {draft.passage_id!r}"
                )
            report = curation.validate_pair(draft, passage, accepted)
            if report.passed:
                accepted.append(draft)
            reports.append(
                {"line": line_no, "passage_id": draft.passage_id, **report.to_json()}
            )
    _emit(reports, args.out)
    return 0


def cmd_multirc_convert(args) -> int:
    with open(args.infile, encoding="utf-8") as handle:
        ds = qa_data.convert_multirc(handle, ignore_case=args.ignore_case, name=args.name)
    _write_dataset(ds, args.out)
    if args.out:
        print(json.dumps({"kept": len(ds)}))
    return 0


def cmd_merge(args) -> int:
    datasets = [_read_dataset(path) for path in args.infiles]
    merged = qa_data.merge(datasets, name=args.name)
    _write_dataset(merged, args.out)
    return 0


def cmd_split(args) -> int:
    ds = _read_dataset(args.infile)
    train, test = qa_data.split(ds, test_fraction=args.fraction, seed=args.seed)
    Path(args.out_train).write_text(qa_data.write_squad_json(train), encoding="utf-8")
    Path(args.out_test).write_text(qa_data.write_squad_json(test), encoding="utf-8")
    print(json.dumps({"train": len(train), "test": len(test), "seed": args.seed}))
    return 0


def cmd_stats(args) -> int:
    ds = _read_dataset(args.infile)
    _emit(qa_data.stats(ds), args.out)
    return 0


def cmd_serve(args) -> int:
    if args.config:
        config = service.ServiceConfig.from_file(
            args.config, host=args.host, port=args.port,
            corpus_path=args.corpus, store_path=args.store,
        )
    else:
        if not (args.corpus and args.store):
            raise UsageError("serve needs --config or both --corpus and --store")
        config = service.ServiceConfig(
            corpus_path=args.corpus,
            store_path=args.store,
            host=args.host or "127.0.0.1",
            port=args.port or 8008,
        )
    service.serve(config)
    return 0


# --- parser construction -------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="coref2qa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(handler=handler)
        p.add_argument("--config", help="JSON file of default flag values")
        p.add_argument("--out", help="output path (default: stdout)")
        return p

    p = add("convert", cmd_convert, help="coreference corpus -> QA dataset")
    p.add_argument("--mode", choices=("dec", "rule", "external"), required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--columns", default="conll2012",
                   help="conll2012 | compact | word,pos,ne,coref indices ('none' allowed for ne)")
    p.add_argument("--name")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--qg-endpoint")
    p.add_argument("--timeout", type=float, default=10.0)
    p.add_argument("--retries", type=int, default=3)

    p = add("transform", cmd_transform, help="build a probe training variant")
    p.add_argument("--probe", choices=("whword", "empty", "shortctx"), required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--embed-endpoint")

    p = add("probe", cmd_probe, help="run a heuristic probe, emit flags")
    p.add_argument("--probe", choices=("randomne", "semoverlap"), required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--entities", help="JSON qid -> [PERSON strings]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.8)
    p.add_argument("--flags", help="existing flags file to merge into")
    p.add_argument("--embed-endpoint")

    p = add("score", cmd_score, help="evaluate a predictions file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--preds", required=True)

    p = add("flags", cmd_flags, help="flag examples an external model solved")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--preds", required=True)
    p.add_argument("--threshold", type=float, default=0.8)
    p.add_argument("--tag", required=True,
                   help="probe tag to record, e.g. wh_word / empty_question / short_distance")
    p.add_argument("--em", action="store_true", help="use exact match instead of F1")
    p.add_argument("--flags", help="existing flags file to merge into")

    p = add("report", cmd_report, help="bias-ratio report from a flags file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--flags", required=True)
    p.add_argument("--bootstrap", help="k,s,seed")

    p = add("subsets", cmd_subsets, help="per-bias subset F1 deltas")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--flags", required=True)
    p.add_argument("--baseline", required=True)
    p.add_argument("--variant", required=True)

    p = add("rank", cmd_rank, help="rank passages by entity/pronoun counts")
    p.add_argument("--passages", required=True)
    p.add_argument("--pronouns-first", action="store_true")

    p = add("validate", cmd_validate, help="validate drafted pairs from JSONL")
    p.add_argument("--passages", required=True)
    p.add_argument("--pairs", required=True)

    p = add("multirc-convert", cmd_multirc_convert, help="MultiRC -> extractive QA")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--ignore-case", action="store_true")
    p.add_argument("--name", default="multirc")

    p = add("merge", cmd_merge, help="concatenate datasets")
    p.add_argument("--in", dest="infiles", nargs="+", required=True)
    p.add_argument("--name", required=True)

    p = add("split", cmd_split, help="deterministic train/test split")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-test", required=True)

    p = add("stats", cmd_stats, help="dataset statistics")
    p.add_argument("--in", dest="infile", required=True)

    p = add("serve", cmd_serve, help="run the annotation service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--corpus")
    p.add_argument("--store")

    return parser


def _apply_config(argv: list[str]) -> list[str]:
    """Expand --config file entries into argv; explicit flags win."""
    path = None
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif arg.startswith("--config="):
            path = arg.split("=", 1)[1]
    if path is None or not argv:
        return argv
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    present = {token.split("=", 1)[0] for token in argv if token.startswith("--")}
    injected: list[str] = []
    for key, value in payload.items():
        flag = "--" + str(key).replace("_", "-")
        if flag in present or flag == "--config":
            continue
        if isinstance(value, bool):
            if value:
                injected.append(flag)
        elif isinstance(value, list):
            injected.append(flag)
            injected.extend(str(v) for v in value)
        else:
            injected.extend([flag, str(value)])
    return [argv[0], *injected, *argv[1:]]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_apply_config(argv))
        return args.handler(args)
    except UsageError as exc:
        json.dump({"error": "UsageError", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return USAGE_EXIT
    except DATA_ERRORS as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return DATA_EXIT
    except SERVICE_ERRORS as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return SERVICE_EXIT


if __name__ == "__main__":
    sys.exit(main())
