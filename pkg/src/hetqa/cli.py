"""Operator entry point: ingest, index, ask, eval, datagen, diagnose-sparql.

Configuration precedence is flag > environment variable (HETQA_<KEY>) >
config file > default. Usage errors exit 2; data errors exit 1 with a
one-line diagnostic.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields
from importlib import resources
from pathlib import Path

from . import datagen, evaluation, pipeline
from .errors import HetqaError
from .kb import ingest
from .llm import HttpChatProvider, RecordingProvider, ScriptedProvider
from .pipeline import RunConfig, Toolset, read_traces, write_traces
from .providers import HashEmbedder, HttpEmbedder, HttpRerankScorer, LexicalScorer
from .textindex import build_sparse, linearize, load_passages

logger = logging.getLogger(__name__)


def _data_path(name: str) -> Path:
    return Path(str(resources.files("hetqa").joinpath("data", name)))


def bundled(name: str) -> Path:
    """Path to a bundled fixture file shipped with the package."""
    return _data_path(name)


def build_config(args: argparse.Namespace) -> RunConfig:
    mapping: dict[str, object] = {}
    if getattr(args, "config", None):
        mapping.update(pipeline.RunConfig.from_file(args.config).__dict__)
    for f in fields(RunConfig):
        env_value = os.environ.get(f"HETQA_{f.name.upper()}")
        if env_value is not None:
            mapping[f.name] = env_value
        flag_value = getattr(args, f.name, None)
        if flag_value is not None:
            mapping[f.name] = flag_value
    if getattr(args, "seed", None) is not None:
        mapping["seed"] = args.seed
    return RunConfig.from_mapping(mapping)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    if not any(a.dest == "config" for a in parser._actions):
        parser.add_argument("--config", help="key=value run configuration file")
    if not any(a.dest == "seed" for a in parser._actions):
        parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--mode", choices=pipeline.MODES, default=None)
    parser.add_argument("--n-hops", dest="n_hops", type=int, default=None)
    parser.add_argument("--diverse-queries", dest="diverse_queries", type=int, default=None)
    parser.add_argument("--context-size", dest="context_size", type=int, default=None)
    parser.add_argument("--retrieval-depth", dest="retrieval_depth", type=int, default=None)
    parser.add_argument("--unified", dest="unified", action="store_const", const=True, default=None)
    parser.add_argument("--unified-retriever", dest="unified_retriever", choices=("sparse", "dense"), default=None)
    parser.add_argument("--text-retriever", dest="text_retriever", choices=("sparse", "dense"), default=None)
    parser.add_argument("--kb-retriever", dest="kb_retriever", choices=("sparse", "dense"), default=None)
    parser.add_argument("--no-sparql", dest="sparql_enabled", action="store_const", const=False, default=None)


def _add_data_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--entities", help="entity catalog (jsonl)")
    parser.add_argument("--relations", help="relation catalog (jsonl)")
    parser.add_argument("--triples", help="triple file (jsonl)")
    parser.add_argument("--passages", help="wiki passage corpus (jsonl)")
    parser.add_argument("--bundled", action="store_true", help="use the bundled fixture corpus")
    # every command accepts these, even where only a subset of keys applies
    if not any(a.dest == "seed" for a in parser._actions):
        parser.add_argument("--seed", type=int, default=None)
    if not any(a.dest == "config" for a in parser._actions):
        parser.add_argument("--config", help="key=value run configuration file")


def _add_provider_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--script", help="scripted LLM fixture/replay file")
    parser.add_argument("--record", help="record live responses to this replay file")
    parser.add_argument("--shim-url", help="model shim base URL for embeddings + reranking")


def _load_store(args: argparse.Namespace):
    if args.bundled:
        return ingest(
            bundled("fixture_entities.jsonl"),
            bundled("fixture_relations.jsonl"),
            bundled("fixture_triples.jsonl"),
        )
    if not (args.entities and args.relations and args.triples):
        raise HetqaError("need --entities/--relations/--triples or --bundled")
    return ingest(args.entities, args.relations, args.triples)


def _load_wiki(args: argparse.Namespace):
    if args.bundled and not args.passages:
        return load_passages(bundled("fixture_passages.jsonl"))
    if not args.passages:
        raise HetqaError("need --passages or --bundled")
    return load_passages(args.passages)


def _make_llm(args: argparse.Namespace):
    if args.script:
        return ScriptedProvider.load(args.script)
    if args.bundled:
        return ScriptedProvider.load(bundled("llm_script.jsonl"))
    provider = HttpChatProvider()
    if args.record:
        provider = RecordingProvider(provider, args.record)
    return provider


def _make_providers(args: argparse.Namespace):
    if getattr(args, "shim_url", None):
        return HttpEmbedder(args.shim_url), HttpRerankScorer(args.shim_url)
    return HashEmbedder(), LexicalScorer()


def cmd_ingest(args: argparse.Namespace) -> int:
    store = _load_store(args)
    store.check_indexes()
    print(f"entities  {len(store.entities)}")
    print(f"relations {len(store.relations)}")
    print(f"triples   {len(store.triples)}")
    if args.manifest:
        expected = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        actual = {
            "entities": len(store.entities),
            "relations": len(store.relations),
            "triples": len(store.triples),
        }
        if expected != actual:
            raise HetqaError(f"manifest mismatch: expected {expected}, got {actual}")
        print("manifest  ok")
    return 0


def cmd_index(args: argparse.Namespace) -> int:
    store = _load_store(args)
    wiki = _load_wiki(args)
    kb_passages = [linearize(t, store) for t in store.triples]
    sparse = build_sparse(kb_passages)
    embedder, _ = _make_providers(args)
    from .textindex import embed_corpus

    dense = embed_corpus(wiki, embedder)
    print(f"sparse index: {sparse.doc_count} linearized passages, {len(sparse.postings)} terms")
    print(f"dense index:  {len(dense.ids)} wiki passages, dim {dense.dim} ({dense.provider_name})")
    return 0


def _build_toolset(args: argparse.Namespace, config: RunConfig) -> Toolset:
    store = _load_store(args)
    wiki = _load_wiki(args)
    embedder, scorer = _make_providers(args)
    return Toolset(store, wiki, _make_llm(args), config, embedder=embedder, scorer=scorer)


def cmd_ask(args: argparse.Namespace) -> int:
    config = build_config(args)
    toolset = _build_toolset(args, config)
    record = None
    if config.mode == "oracle":
        if not args.benchmark or not args.record_id:
            raise HetqaError("oracle mode needs --benchmark and --record-id")
        records = {r.id: r for r in evaluation.load_benchmark(args.benchmark)}
        if args.record_id not in records:
            raise HetqaError(f"record {args.record_id!r} not in benchmark")
        record = records[args.record_id]
    answer_text, trace = pipeline.answer(args.question, config, toolset, record=record)
    print(answer_text)
    if args.trace_out:
        write_traces([trace], args.trace_out)
        print(f"trace: {args.trace_out}", file=sys.stderr)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    config = build_config(args)
    toolset = _build_toolset(args, config)
    records = evaluation.load_benchmark(args.benchmark)
    if not records:
        raise HetqaError("benchmark file holds no records")

    def run_one(record):
        gold = record if config.mode == "oracle" else None
        _, trace = pipeline.answer(record.question, config, toolset, record=gold)
        return record.id, trace

    if args.parallel > 1:
        with ThreadPoolExecutor(max_workers=args.parallel) as pool:
            traces = dict(pool.map(run_one, records))
    else:
        traces = dict(run_one(r) for r in records)

    metadata = {
        "mode": config.mode,
        "n_hops": config.n_hops,
        "diverse_queries": config.diverse_queries,
        "context_size": config.context_size,
        "seed": config.seed,
        "provider": toolset.llm.name,
    }
    report = evaluation.evaluate_run(records, traces, store=toolset.store, metadata=metadata)
    if args.traces:
        ordered = [traces[r.id] for r in sorted(records, key=lambda r: r.id)]
        write_traces(ordered, args.traces)
    if args.json_out:
        Path(args.json_out).write_text(report.to_json_text(), encoding="utf-8")
    table = report.to_table_text()
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
    else:
        print(table, end="")
    return 0


def cmd_datagen(args: argparse.Namespace) -> int:
    store = _load_store(args)
    rng = random.Random(args.seed if args.seed is not None else 0)
    wiki_pages = {}
    if args.wiki_pages:
        wiki_pages = json.loads(Path(args.wiki_pages).read_text(encoding="utf-8"))
    gateway = datagen.TemplateWriter() if args.offline else _make_llm(args)

    anchors = datagen.filter_anchors(datagen.load_anchors(args.anchors))
    composed_questions = []
    discarded = 0
    counter = 0
    for anchor in anchors:
        for direction in ("text_to_kb", "kb_to_text"):
            pairs = datagen.retain_triples(
                datagen.link_bridge(anchor, store, direction), store, wiki_pages
            )
            if not pairs:
                continue
            pair = pairs[0]
            if direction == "text_to_kb":
                choices = ["short_entity_text_kb", "yesno_text_kb"]
                if store.object_count(pair.triple.subject, pair.triple.predicate) >= 2:
                    choices.append("aggregate_text_kb")
            else:
                choices = ["short_entity_kb_text", "yesno_kb_text"]
            qtype = rng.choice(choices)
            counter += 1
            record_id = f"gen-{counter:04d}"
            try:
                composed_questions.append(
                    datagen.realize_pair(pair, qtype, store, gateway, rng, record_id)
                )
            except (HetqaError, ValueError) as exc:
                discarded += 1
                logger.info("discarded %s: %s", record_id, exc)

    if args.export_annotation:
        rows = datagen.export_annotation_tasks(composed_questions, rng=rng)
        datagen.write_annotation_tasks(rows, args.export_annotation)
        print(f"exported {len(rows)} annotation tasks")
    if args.import_verdicts:
        datagen.import_verdicts(composed_questions, datagen.read_verdicts(args.import_verdicts))
    records = datagen.emit_records(composed_questions, store)
    evaluation.save_benchmark(records, args.out)
    print(f"emitted {len(records)} records ({discarded} discarded) -> {args.out}")
    return 0


def cmd_diagnose_sparql(args: argparse.Namespace) -> int:
    store = _load_store(args)
    records = evaluation.load_benchmark(args.benchmark)
    traces = read_traces(args.traces)
    by_question = {t.question: t for t in traces}
    ordered = []
    for record in records:
        trace = by_question.get(record.question)
        if trace is None:
            raise HetqaError(f"no trace for record {record.id}")
        ordered.append(trace)
    qid, qid_rel, qid_star = evaluation.sparql_diagnostics(ordered, records, store)
    print(f"QID     {qid:.4f}")
    print(f"QID+REL {qid_rel:.4f}")
    print(f"QID*    {qid_star:.4f}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hetqa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load and validate a knowledge subset")
    _add_data_flags(p)
    p.add_argument("--manifest", help="expected counts file to validate against")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", help="build retrieval indexes and report stats")
    _add_data_flags(p)
    _add_provider_flags(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("ask", help="answer one question")
    p.add_argument("--question", required=True)
    p.add_argument("--trace-out", dest="trace_out")
    p.add_argument("--benchmark", help="benchmark file (oracle mode)")
    p.add_argument("--record-id", dest="record_id", help="record id (oracle mode)")
    _add_data_flags(p)
    _add_provider_flags(p)
    _add_config_flags(p)
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("eval", help="run a benchmark and write a report")
    p.add_argument("--benchmark", required=True)
    p.add_argument("--out", help="plain-text report path (default: stdout)")
    p.add_argument("--json", dest="json_out", help="machine-readable report path")
    p.add_argument("--traces", help="write per-question traces here (jsonl)")
    p.add_argument("--parallel", type=int, default=1)
    _add_data_flags(p)
    _add_provider_flags(p)
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("datagen", help="construct benchmark records from anchors")
    p.add_argument("--anchors", required=True, help="anchor QA tuples (jsonl)")
    p.add_argument("--wiki-pages", dest="wiki_pages", help="title -> page text map (json)")
    p.add_argument("--out", required=True, help="benchmark output (jsonl)")
    p.add_argument("--offline", action="store_true", help="use the deterministic template writer")
    p.add_argument("--export-annotation", dest="export_annotation")
    p.add_argument("--import-verdicts", dest="import_verdicts")
    p.add_argument("--seed", type=int, default=0)
    _add_data_flags(p)
    _add_provider_flags(p)
    p.set_defaults(func=cmd_datagen)

    p = sub.add_parser("diagnose-sparql", help="symbolic-query diagnostics for a trace set")
    p.add_argument("--traces", required=True)
    p.add_argument("--benchmark", required=True)
    _add_data_flags(p)
    p.set_defaults(func=cmd_diagnose_sparql)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("HETQA_LOG", "WARNING"))
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HetqaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
