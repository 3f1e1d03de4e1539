import pytest

from hetqa.cli import bundled
from hetqa.evaluation import load_benchmark
from hetqa.llm import ScriptedProvider
from hetqa.pipeline import PipelineTrace, RunConfig, Toolset, answer, read_traces, write_traces
from hetqa.textindex import linearize

QUESTION = "How many organizations is the 26th president of the United States a member of?"


def make_toolset(store, wiki_passages, embedder, llm=None, **config_kwargs):
    config = RunConfig(**config_kwargs)
    llm = llm or ScriptedProvider.load(bundled("llm_script.jsonl"))
    return config, Toolset(store, wiki_passages, llm, config, embedder=embedder)


def scripted_for(question, n_hops, final_answer="42"):
    """Programmatic fixture: n hop entries (3 variants each) plus one final."""
    entries = []
    for j in range(n_hops):
        variants = [
            f" step {j} variant {v}\nSearch Query: probe {j} v{v}\nQuery Entity: None\nSPARQL: None"
            for v in range(3)
        ]
        entries.append((f"Question: {question}", variants))
    entries.append((f"Question: {question}", [f" done\nAnswer: {final_answer}"]))
    return ScriptedProvider(entries)


def test_fixture_question_end_to_end(store, wiki_passages, embedder):
    config, toolset = make_toolset(store, wiki_passages, embedder)
    answer_text, trace = answer(QUESTION, config, toolset)
    assert answer_text == "5"
    assert trace.llm_call_count == 3
    assert len(trace.hops) == 2
    assert trace.hops[1].executed_sparql is not None


@pytest.mark.parametrize("n_hops", [1, 2, 3])
def test_call_count_is_hops_plus_one(store, wiki_passages, embedder, n_hops):
    question = f"synthetic question with {n_hops} hops?"
    llm = scripted_for(question, n_hops)
    config, toolset = make_toolset(store, wiki_passages, embedder, llm=llm, n_hops=n_hops)
    _, trace = answer(question, config, toolset)
    assert trace.llm_call_count == n_hops + 1
    assert len(trace.hops) == n_hops


def test_call_count_holds_when_parsing_fails(store, wiki_passages, embedder):
    question = "question whose samples never parse?"
    entries = [
        (f"Question: {question}", ["no labeled fields at all"] * 3),
        (f"Question: {question}", ["gibberish"] * 3),
        (f"Question: {question}", [" huh\nAnswer: unknown"]),
    ]
    config, toolset = make_toolset(
        store, wiki_passages, embedder, llm=ScriptedProvider(entries), n_hops=2
    )
    answer_text, trace = answer(question, config, toolset)
    assert trace.llm_call_count == 3
    assert all(not h.search_queries for h in trace.hops)
    assert all(not h.context.items for h in trace.hops)
    assert any("aborted" in note for h in trace.hops for note in h.notes)
    assert answer_text == "unknown"


def test_closed_book_mode(store, wiki_passages, embedder):
    question = "closed book question?"
    entries = [(f"Question: {question}", [" recalling\nAnswer: from memory"])]
    config, toolset = make_toolset(
        store, wiki_passages, embedder, llm=ScriptedProvider(entries), mode="closed_book"
    )
    answer_text, trace = answer(question, config, toolset)
    assert answer_text == "from memory"
    assert trace.llm_call_count == 1
    assert trace.invocations == []
    assert trace.hops == []


def test_vanilla_mode_single_retrieval(store, wiki_passages, embedder):
    question = "Who is the sibling of Emily Blunt?"
    entries = [(f"Question: {question}", [" looking\nAnswer: Felicity Blunt"])]
    config, toolset = make_toolset(
        store, wiki_passages, embedder, llm=ScriptedProvider(entries), mode="vanilla"
    )
    answer_text, trace = answer(question, config, toolset)
    assert answer_text == "Felicity Blunt"
    assert trace.llm_call_count == 1
    retrieval_queries = {inv.query for inv in trace.invocations}
    assert retrieval_queries == {question}
    assert trace.hops[0].context.items


def test_oracle_mode_contexts_are_exactly_gold(store, wiki_passages, embedder):
    records = load_benchmark(bundled("mini_benchmark.jsonl"))
    record = next(r for r in records if r.id == "mb-03")
    entries = [(f"Question: {record.question}", [" gold\nAnswer: Felicity Blunt"])]
    config, toolset = make_toolset(
        store, wiki_passages, embedder, llm=ScriptedProvider(entries), mode="oracle"
    )
    _, trace = answer(record.question, config, toolset, record=record)
    assert trace.llm_call_count == 1
    expected = set()
    for gold in record.hops:
        if gold.gold_passage_id:
            expected.add(gold.gold_passage_id)
        if gold.gold_triple:
            expected.add(linearize(gold.gold_triple, store).id)
    got = {c.key for hop in trace.hops for c in hop.context.items}
    assert got == expected


def test_oracle_mode_requires_record(store, wiki_passages, embedder):
    config, toolset = make_toolset(store, wiki_passages, embedder, mode="oracle")
    with pytest.raises(ValueError):
        answer("q?", config, toolset)


def test_trace_closure(store, wiki_passages, embedder):
    config, toolset = make_toolset(store, wiki_passages, embedder)
    _, trace = answer(QUESTION, config, toolset)
    for hop in trace.hops:
        hop_hits = {
            key
            for inv in trace.invocations
            if inv.hop == hop.index
            for key in inv.hit_keys
        }
        for item in hop.context.items:
            assert item.key in hop_hits


def test_sparql_flag_off_removes_symbolic_evidence(store, wiki_passages, embedder):
    config, toolset = make_toolset(store, wiki_passages, embedder, sparql_enabled=False)
    _, trace = answer(QUESTION, config, toolset)
    sources = {c.source for hop in trace.hops for c in hop.context.items}
    assert "sparql" not in sources
    assert all(inv.tool != "sparql" for inv in trace.invocations)
    assert trace.llm_call_count == 3


def test_unified_mode_searches_both_corpora(store, wiki_passages, embedder):
    config, toolset = make_toolset(store, wiki_passages, embedder, unified=True, unified_retriever="sparse")
    assert len(toolset.routes) == 1
    kind, corpus_name, _index, origins = toolset.routes[0]
    assert kind == "sparse"
    assert origins == {"wiki_text", "linearized_triple"}
    _, trace = answer(QUESTION, config, toolset)
    retrieval = [inv for inv in trace.invocations if inv.tool in ("sparse", "dense")]
    assert retrieval
    assert {inv.corpus for inv in retrieval} == {"unified"}
    assert {inv.tool for inv in retrieval} == {"sparse"}


def test_swapped_retrievers(store, wiki_passages, embedder):
    config, toolset = make_toolset(
        store, wiki_passages, embedder, text_retriever="sparse", kb_retriever="dense"
    )
    kinds = {(corpus, kind) for kind, corpus, _i, _o in toolset.routes}
    assert kinds == {("wiki_text", "sparse"), ("kb_linearized", "dense")}


def test_end_to_end_bit_reproducible(store, wiki_passages, embedder):
    dicts = []
    for _ in range(2):
        config, toolset = make_toolset(store, wiki_passages, embedder)
        _, trace = answer(QUESTION, config, toolset)
        dicts.append(trace.to_dict())
    assert dicts[0] == dicts[1]


def test_trace_round_trip(tmp_path, store, wiki_passages, embedder):
    config, toolset = make_toolset(store, wiki_passages, embedder)
    _, trace = answer(QUESTION, config, toolset)
    path = tmp_path / "traces.jsonl"
    write_traces([trace], path)
    loaded = read_traces(path)[0]
    assert loaded.to_dict() == trace.to_dict()
    assert isinstance(loaded, PipelineTrace)


def test_config_from_file_and_validation(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text(
        "mode = multihop\nn_hops = 2\ndiverse_queries = 4  # t\ncontext_size=5\nsparql_enabled = false\n",
        encoding="utf-8",
    )
    config = RunConfig.from_file(path)
    assert config.diverse_queries == 4
    assert config.context_size == 5
    assert config.sparql_enabled is False
    with pytest.raises(ValueError):
        RunConfig(mode="unknown")
    with pytest.raises(ValueError):
        RunConfig(context_size=0)
