#!/usr/bin/env python3
"""Freeze the golden end-to-end artifacts under tests/golden/.

Regenerate after intentionally changing fixtures, ranking, or report format:

    python tools/make_goldens.py

The acceptance suite compares the live pipeline against these byte-for-byte.
"""

from __future__ import annotations

from pathlib import Path

from hetqa import cli
from hetqa.kb import ingest
from hetqa.llm import ScriptedProvider
from hetqa.pipeline import RunConfig, Toolset, answer
from hetqa.prompts import render_prompt
from hetqa.providers import HashEmbedder
from hetqa.textindex import load_passages

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "tests" / "golden"
DATA = ROOT / "src" / "hetqa" / "data"


def main():
    GOLDEN.mkdir(parents=True, exist_ok=True)

    rc = cli.main(
        [
            "eval",
            "--benchmark", str(DATA / "mini_benchmark.jsonl"),
            "--bundled",
            "--out", str(GOLDEN / "report.txt"),
            "--json", str(GOLDEN / "report.json"),
            "--traces", str(GOLDEN / "traces.jsonl"),
        ]
    )
    if rc != 0:
        raise SystemExit(f"eval failed with {rc}")

    store = ingest(
        DATA / "fixture_entities.jsonl",
        DATA / "fixture_relations.jsonl",
        DATA / "fixture_triples.jsonl",
    )
    wiki = load_passages(DATA / "fixture_passages.jsonl")
    config = RunConfig()
    toolset = Toolset(
        store, wiki, ScriptedProvider.load(DATA / "llm_script.jsonl"), config, embedder=HashEmbedder()
    )
    question = "How many organizations is the 26th president of the United States a member of?"
    _, trace = answer(question, config, toolset)
    prompt = render_prompt("hop", question, [trace.hops[0].context], hop_index=2)
    (GOLDEN / "hop2_prompt.txt").write_text(prompt, encoding="utf-8")
    print("golden files written to", GOLDEN)


if __name__ == "__main__":
    main()
