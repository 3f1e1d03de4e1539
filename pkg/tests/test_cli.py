import json

import pytest

from hetqa.cli import bundled, main

FIXTURE_QUESTION = "How many organizations is the 26th president of the United States a member of?"


def test_missing_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2


def test_ingest_bundled_reports_counts(capsys):
    assert main(["ingest", "--bundled"]) == 0
    out = capsys.readouterr().out
    manifest = json.loads(bundled("fixture_manifest.json").read_text(encoding="utf-8"))
    assert f"entities  {manifest['entities']}" in out
    assert f"triples   {manifest['triples']}" in out


def test_ingest_validates_manifest(capsys, tmp_path):
    good = tmp_path / "manifest.json"
    good.write_text(bundled("fixture_manifest.json").read_text(encoding="utf-8"), encoding="utf-8")
    assert main(["ingest", "--bundled", "--manifest", str(good)]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text('{"entities": 1, "relations": 1, "triples": 1}', encoding="utf-8")
    assert main(["ingest", "--bundled", "--manifest", str(bad)]) == 1


def test_ingest_missing_files_is_data_error(capsys):
    assert main(["ingest", "--entities", "nope.jsonl", "--relations", "nope.jsonl",
                 "--triples", "nope.jsonl"]) == 1
    assert "error:" in capsys.readouterr().err


def test_index_reports_stats(capsys):
    assert main(["index", "--bundled"]) == 0
    out = capsys.readouterr().out
    assert "sparse index:" in out and "dense index:" in out


def test_ask_fixture_question_prints_answer(capsys, tmp_path):
    trace_path = tmp_path / "trace.jsonl"
    rc = main(["ask", "--question", FIXTURE_QUESTION, "--bundled", "--trace-out", str(trace_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.strip() == "5"
    trace = json.loads(trace_path.read_text(encoding="utf-8"))
    assert trace["llm_call_count"] == 3


def test_ask_closed_book_mode(capsys):
    rc = main(["ask", "--question", FIXTURE_QUESTION, "--bundled", "--mode", "closed_book"])
    assert rc == 0
    # the scripted fixture consumes entries in order, so closed book answers
    # from the first (hop-1) entry's text; what matters is a clean exit
    assert capsys.readouterr().out.strip()


def test_eval_writes_report_and_traces(tmp_path, capsys):
    report = tmp_path / "report.txt"
    report_json = tmp_path / "report.json"
    traces = tmp_path / "traces.jsonl"
    rc = main([
        "eval", "--benchmark", str(bundled("mini_benchmark.jsonl")), "--bundled",
        "--out", str(report), "--json", str(report_json), "--traces", str(traces),
    ])
    assert rc == 0
    table = report.read_text(encoding="utf-8")
    assert "EM       1.0000" in table
    payload = json.loads(report_json.read_text(encoding="utf-8"))
    assert payload["aggregates"]["em"] == 1.0
    assert len(traces.read_text(encoding="utf-8").strip().split("\n")) == 10


def test_eval_matches_golden_report(tmp_path, golden_dir):
    report = tmp_path / "report.txt"
    report_json = tmp_path / "report.json"
    rc = main([
        "eval", "--benchmark", str(bundled("mini_benchmark.jsonl")), "--bundled",
        "--out", str(report), "--json", str(report_json),
    ])
    assert rc == 0
    assert report.read_bytes() == (golden_dir / "report.txt").read_bytes()
    assert report_json.read_bytes() == (golden_dir / "report.json").read_bytes()


def test_eval_parallel_matches_serial(tmp_path):
    serial = tmp_path / "serial.txt"
    parallel = tmp_path / "parallel.txt"
    base = ["eval", "--benchmark", str(bundled("mini_benchmark.jsonl")), "--bundled"]
    assert main(base + ["--out", str(serial)]) == 0
    assert main(base + ["--out", str(parallel), "--parallel", "4"]) == 0
    assert serial.read_bytes() == parallel.read_bytes()


def test_eval_oracle_mode(tmp_path):
    report = tmp_path / "report.txt"
    rc = main([
        "eval", "--benchmark", str(bundled("mini_benchmark.jsonl")), "--bundled",
        "--mode", "oracle", "--out", str(report),
    ])
    # oracle consumes only the final entry per question, so hop entries remain
    # unused; the scripted provider tolerates that because matching skips them
    assert rc == 0
    assert "H1-R     1.0000" in report.read_text(encoding="utf-8")


def test_datagen_offline_roundtrip(tmp_path, capsys):
    out = tmp_path / "bench.jsonl"
    tasks = tmp_path / "tasks.jsonl"
    rc = main([
        "datagen", "--anchors", str(bundled("nq_anchors.jsonl")), "--bundled", "--offline",
        "--wiki-pages", str(bundled("fixture_wiki_pages.json")),
        "--out", str(out), "--export-annotation", str(tasks), "--seed", "3",
    ])
    assert rc == 0
    from hetqa.evaluation import load_benchmark

    records = load_benchmark(out)
    assert records, "the bundled anchors should yield at least one record"
    task_rows = [json.loads(line) for line in tasks.read_text(encoding="utf-8").splitlines()]
    assert len(task_rows) == 2 * len(records)


def test_diagnose_sparql_on_golden_traces(capsys, golden_dir):
    rc = main([
        "diagnose-sparql", "--traces", str(golden_dir / "traces.jsonl"),
        "--benchmark", str(bundled("mini_benchmark.jsonl")), "--bundled",
    ])
    assert rc == 0
    out = capsys.readouterr().out
    assert "QID     1.0000" in out
    assert "QID+REL 1.0000" in out
    assert "QID*    1.0000" in out


def test_config_precedence_env_vs_flag(tmp_path, monkeypatch, capsys):
    config = tmp_path / "run.conf"
    config.write_text("context_size = 7\n", encoding="utf-8")
    monkeypatch.setenv("HETQA_CONTEXT_SIZE", "9")
    trace_path = tmp_path / "t.jsonl"
    rc = main([
        "ask", "--question", FIXTURE_QUESTION, "--bundled",
        "--config", str(config), "--context-size", "2", "--trace-out", str(trace_path),
    ])
    assert rc == 0
    trace = json.loads(trace_path.read_text(encoding="utf-8"))
    assert all(len(h["context"]) <= 2 for h in trace["hops"])


def test_config_env_overrides_file(tmp_path, monkeypatch, capsys):
    config = tmp_path / "run.conf"
    config.write_text("context_size = 7\n", encoding="utf-8")
    monkeypatch.setenv("HETQA_CONTEXT_SIZE", "1")
    trace_path = tmp_path / "t.jsonl"
    rc = main([
        "ask", "--question", FIXTURE_QUESTION, "--bundled",
        "--config", str(config), "--trace-out", str(trace_path),
    ])
    assert rc == 0
    trace = json.loads(trace_path.read_text(encoding="utf-8"))
    assert all(len(h["context"]) <= 1 for h in trace["hops"])
