"""The multi-hop control loop: prompt, parse, retrieve, rank, answer, trace.

For an n-hop question the engine makes exactly n+1 generation calls: one per
hop to obtain the decomposed search queries (sampled several times at a high
temperature for diversity) plus one final call that answers over everything
retrieved. Vanilla, closed-book, and gold-context (oracle) modes are provided
for baselines and ablations.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

from . import sparql
from .errors import MissingField, NoEntityMatch, ParseError, UnboundProjection
from .kb import TripleStore
from .linking import LinkResult, link, repair_sparql
from .llm import GenerationRequest, generate
from .prompts import parse_final_fields, parse_llm_fields, render_prompt
from .providers import LexicalScorer
from .rerank import EvidenceCandidate, RankedContext, fuse_and_rank
from .textindex import (
    Passage,
    build_sparse,
    embed_corpus,
    linearize,
    search_dense,
    search_sparse,
)

logger = logging.getLogger(__name__)

MODES = ("multihop", "vanilla", "closed_book", "oracle")


@dataclass
class RunConfig:
    mode: str = "multihop"
    n_hops: int = 2
    diverse_queries: int = 3  # samples per hop prompt
    context_size: int = 3  # evidence pieces kept per hop
    retrieval_depth: int = 3  # hits requested per retriever per query
    query_temperature: float = 0.7
    answer_temperature: float = 0.0
    max_tokens: int = 512
    seed: int = 0
    unified: bool = False  # merge both corpora into one index
    unified_retriever: str = "sparse"
    text_retriever: str = "dense"
    kb_retriever: str = "sparse"
    sparql_enabled: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n_hops < 1 or self.diverse_queries < 1 or self.context_size < 1:
            raise ValueError("n_hops, diverse_queries, and context_size must be >= 1")
        for name in ("unified_retriever", "text_retriever", "kb_retriever"):
            if getattr(self, name) not in ("sparse", "dense"):
                raise ValueError(f"{name} must be 'sparse' or 'dense'")

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RunConfig":
        kwargs = {}
        for f in fields(cls):
            if f.name not in mapping:
                continue
            raw = mapping[f.name]
            if f.type == "bool" and isinstance(raw, str):
                kwargs[f.name] = raw.strip().lower() in ("1", "true", "yes", "on")
            elif f.type == "int":
                kwargs[f.name] = int(raw)
            elif f.type == "float":
                kwargs[f.name] = float(raw)
            else:
                kwargs[f.name] = raw if not isinstance(raw, str) else raw.strip()
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        """Read a key=value config file ('#' starts a comment)."""
        mapping: dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"bad config line {line!r}")
                key, value = line.split("=", 1)
                mapping[key.strip()] = value.strip()
        return cls.from_mapping(mapping)


@dataclass
class ToolInvocation:
    hop: int
    tool: str  # "sparse" | "dense" | "sparql" | "oracle"
    corpus: str
    query: str
    hit_keys: list[str]
    scores: list[float]


@dataclass
class LinkSummary:
    chosen: Optional[str]
    candidate_ids: list[str]
    method: Optional[str]

    @classmethod
    def from_result(cls, result: LinkResult) -> "LinkSummary":
        return cls(
            chosen=result.chosen,
            candidate_ids=[c.entity.id for c in result.candidates],
            method=result.method,
        )


@dataclass
class HopState:
    index: int
    rationale: str = ""
    search_queries: list[str] = field(default_factory=list)
    query_entity: Optional[str] = None
    sparql_text: Optional[str] = None
    executed_sparql: Optional[str] = None
    link: Optional[LinkSummary] = None
    context: RankedContext = field(default_factory=lambda: RankedContext(question=""))
    notes: list[str] = field(default_factory=list)


@dataclass
class PipelineTrace:
    question: str
    mode: str
    hops: list[HopState] = field(default_factory=list)
    llm_call_count: int = 0
    invocations: list[ToolInvocation] = field(default_factory=list)
    final_rationale: str = ""
    answer: str = ""

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "mode": self.mode,
            "hops": [
                {
                    "hop": h.index,
                    "rationale": h.rationale,
                    "search_queries": h.search_queries,
                    "query_entity": h.query_entity,
                    "sparql_text": h.sparql_text,
                    "executed_sparql": h.executed_sparql,
                    "link": asdict(h.link) if h.link else None,
                    "context": [
                        {
                            "key": c.key,
                            "text": c.text,
                            "source": c.source,
                            "originating_query": c.originating_query,
                            "relevance": round(c.relevance, 6) if c.relevance is not None else None,
                        }
                        for c in h.context.items
                    ],
                    "notes": h.notes,
                }
                for h in self.hops
            ],
            "llm_call_count": self.llm_call_count,
            "tool_invocations": [
                {
                    "hop": inv.hop,
                    "tool": inv.tool,
                    "corpus": inv.corpus,
                    "query": inv.query,
                    "hit_keys": inv.hit_keys,
                    "scores": [round(s, 6) for s in inv.scores],
                }
                for inv in self.invocations
            ],
            "final_rationale": self.final_rationale,
            "answer": self.answer,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineTrace":
        hops = []
        for h in data.get("hops", []):
            link_data = h.get("link")
            hops.append(
                HopState(
                    index=h["hop"],
                    rationale=h.get("rationale", ""),
                    search_queries=list(h.get("search_queries", [])),
                    query_entity=h.get("query_entity"),
                    sparql_text=h.get("sparql_text"),
                    executed_sparql=h.get("executed_sparql"),
                    link=LinkSummary(**link_data) if link_data else None,
                    context=RankedContext(
                        question=h.get("search_queries", [""])[0] if h.get("search_queries") else "",
                        items=[
                            EvidenceCandidate(
                                key=c["key"],
                                text=c["text"],
                                source=c["source"],
                                originating_query=c.get("originating_query", ""),
                                relevance=c.get("relevance"),
                            )
                            for c in h.get("context", [])
                        ],
                    ),
                    notes=list(h.get("notes", [])),
                )
            )
        trace = cls(
            question=data["question"],
            mode=data.get("mode", "multihop"),
            hops=hops,
            llm_call_count=data.get("llm_call_count", 0),
            final_rationale=data.get("final_rationale", ""),
            answer=data.get("answer", ""),
        )
        for inv in data.get("tool_invocations", []):
            trace.invocations.append(
                ToolInvocation(
                    hop=inv["hop"],
                    tool=inv["tool"],
                    corpus=inv["corpus"],
                    query=inv["query"],
                    hit_keys=list(inv["hit_keys"]),
                    scores=list(inv["scores"]),
                )
            )
        return trace


def write_traces(traces: Sequence[PipelineTrace], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for trace in traces:
            fh.write(json.dumps(trace.to_dict(), ensure_ascii=False) + "\n")


def read_traces(path: str | Path) -> list[PipelineTrace]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(PipelineTrace.from_dict(json.loads(line)))
    return out


class Toolset:
    """Retrieval routes, providers, and the store, assembled per run config.

    The default routing sends text questions to the dense index over the
    wiki corpus and keyword questions to BM25 over the linearized triples;
    flags can swap retrievers, merge both corpora into a single index, or
    disable symbolic queries entirely.
    """

    def __init__(
        self,
        store: TripleStore,
        wiki_passages: Sequence[Passage],
        llm,
        config: RunConfig,
        embedder=None,
        scorer=None,
    ):
        self.store = store
        self.config = config
        self.llm = llm
        self.embedder = embedder
        self.scorer = scorer if scorer is not None else LexicalScorer()
        self.wiki_passages = list(wiki_passages)
        self.kb_passages = [linearize(t, store) for t in store.triples]
        self._passage_by_id = {p.id: p for p in self.wiki_passages + self.kb_passages}

        # (retriever kind, corpus name, index, covered origins)
        self.routes: list[tuple[str, str, object, set[str]]] = []
        if config.unified:
            corpus = self.wiki_passages + self.kb_passages
            origins = {p.origin for p in corpus}
            self.routes.append(
                (config.unified_retriever, "unified", self._build(config.unified_retriever, corpus), origins)
            )
        else:
            self.routes.append(
                (config.text_retriever, "wiki_text", self._build(config.text_retriever, self.wiki_passages), {"wiki_text"})
            )
            self.routes.append(
                (config.kb_retriever, "kb_linearized", self._build(config.kb_retriever, self.kb_passages), {"linearized_triple"})
            )

    def _build(self, kind: str, corpus: Sequence[Passage]):
        if kind == "sparse":
            return build_sparse(corpus)
        if self.embedder is None:
            raise ValueError("dense retrieval requested but no embedding provider configured")
        return embed_corpus(corpus, self.embedder)

    def passage(self, passage_id: str) -> Optional[Passage]:
        return self._passage_by_id.get(passage_id)

    def passage_text(self, passage_id: str) -> str:
        p = self._passage_by_id[passage_id]
        return f"{p.title}: {p.body}" if p.title else p.body

    def retrieve(self, hop: int, query: str, trace: PipelineTrace) -> list[EvidenceCandidate]:
        pool: list[EvidenceCandidate] = []
        for kind, corpus_name, index, _origins in self.routes:
            if kind == "sparse":
                hits = search_sparse(index, query, self.config.retrieval_depth)
                source = "sparse_kb"
            else:
                hits = search_dense(index, query, self.config.retrieval_depth, self.embedder)
                source = "dense_text"
            trace.invocations.append(
                ToolInvocation(
                    hop=hop,
                    tool=kind,
                    corpus=corpus_name,
                    query=query,
                    hit_keys=[h.passage_id for h in hits],
                    scores=[h.score for h in hits],
                )
            )
            for h in hits:
                pool.append(
                    EvidenceCandidate(
                        key=h.passage_id,
                        text=self.passage_text(h.passage_id),
                        source=source,
                        originating_query=query,
                        relevance=None,
                    )
                )
        return pool

    def run_symbolic(self, hop: int, state: HopState, context_query: str, trace: PipelineTrace) -> list[EvidenceCandidate]:
        """Parse, repair, and execute the hop's generated symbolic query."""
        if not self.config.sparql_enabled or not state.sparql_text:
            return []
        try:
            query = sparql.parse(state.sparql_text)
        except (ParseError, UnboundProjection) as exc:
            state.notes.append(f"symbolic query rejected: {exc}")
            return []
        executed = query
        if state.query_entity:
            result = link(state.query_entity, context_query, self.store, provider=self.embedder)
            state.link = LinkSummary.from_result(result)
            try:
                executed = repair_sparql(query, result, self.store, search_query=context_query)
            except NoEntityMatch:
                state.notes.append("entity link found no candidates; executing query as generated")
        executed_text = sparql.to_text(executed)
        state.executed_sparql = executed_text
        result_set = sparql.evaluate(executed, self.store)
        renderings = sparql.render_evidence(result_set, executed, self.store)
        trace.invocations.append(
            ToolInvocation(
                hop=hop,
                tool="sparql",
                corpus="kb_store",
                query=executed_text,
                hit_keys=list(renderings),
                scores=[0.0] * len(renderings),
            )
        )
        return [
            EvidenceCandidate(
                key=line,
                text=line,
                source="sparql",
                originating_query=executed_text,
                relevance=None,
            )
            for line in renderings
        ]


def _dedupe(queries: Sequence[str]) -> list[str]:
    seen: set[str] = set()
    out = []
    for q in queries:
        if q not in seen:
            seen.add(q)
            out.append(q)
    return out


def _final_call(question: str, contexts: Sequence[RankedContext], config: RunConfig, toolset: Toolset):
    prompt = render_prompt("final", question, contexts)
    response = generate(
        GenerationRequest(
            prompt,
            temperature=config.answer_temperature,
            max_tokens=config.max_tokens,
            n_samples=1,
        ),
        toolset.llm,
    )
    return parse_final_fields(response.samples[0])


def answer(
    question: str,
    config: RunConfig,
    toolset: Toolset,
    record=None,
) -> tuple[str, PipelineTrace]:
    """Answer one question under the configured mode, returning a full trace.

    Multi-hop mode samples ``diverse_queries`` completions per hop at the
    query temperature, pools retrieval over the deduplicated search queries,
    executes the repaired symbolic query when one was generated, and keeps the
    top ``context_size`` evidence pieces per hop. A hop whose retrieval wholly
    fails proceeds with an empty context instead of aborting. Gold-context
    mode requires the benchmark ``record`` the gold evidence comes from.
    """
    trace = PipelineTrace(question=question, mode=config.mode)

    if config.mode == "closed_book":
        trace.final_rationale, trace.answer = _final_call(question, [], config, toolset)
        trace.llm_call_count += 1
        return trace.answer, trace

    if config.mode == "vanilla":
        hop = HopState(index=1, search_queries=[question])
        pool = toolset.retrieve(1, question, trace)
        hop.context = fuse_and_rank(question, pool, config.context_size, toolset.scorer)
        trace.hops.append(hop)
        trace.final_rationale, trace.answer = _final_call(question, [hop.context], config, toolset)
        trace.llm_call_count += 1
        return trace.answer, trace

    if config.mode == "oracle":
        if record is None:
            raise ValueError("oracle mode needs the benchmark record carrying gold evidence")
        contexts = []
        for j, gold in enumerate(record.hops, start=1):
            items = []
            if gold.gold_passage_id:
                passage = toolset.passage(gold.gold_passage_id)
                text = toolset.passage_text(gold.gold_passage_id) if passage else gold.gold_passage_id
                items.append(
                    EvidenceCandidate(
                        key=gold.gold_passage_id,
                        text=text,
                        source="dense_text",
                        originating_query="gold",
                        relevance=1.0,
                    )
                )
            if gold.gold_triple is not None:
                lin = linearize(gold.gold_triple, toolset.store)
                items.append(
                    EvidenceCandidate(
                        key=lin.id, text=lin.body, source="sparse_kb", originating_query="gold", relevance=1.0
                    )
                )
            trace.invocations.append(
                ToolInvocation(
                    hop=j,
                    tool="oracle",
                    corpus="gold",
                    query=gold.sub_question,
                    hit_keys=[c.key for c in items],
                    scores=[1.0] * len(items),
                )
            )
            context = RankedContext(question=gold.sub_question, items=items)
            contexts.append(context)
            trace.hops.append(HopState(index=j, search_queries=[gold.sub_question], context=context))
        trace.final_rationale, trace.answer = _final_call(question, contexts, config, toolset)
        trace.llm_call_count += 1
        return trace.answer, trace

    # multihop
    contexts: list[RankedContext] = []
    for j in range(1, config.n_hops + 1):
        prompt = render_prompt("hop", question, contexts, hop_index=j)
        response = generate(
            GenerationRequest(
                prompt,
                temperature=config.query_temperature,
                max_tokens=config.max_tokens,
                n_samples=config.diverse_queries,
            ),
            toolset.llm,
        )
        trace.llm_call_count += 1

        hop = HopState(index=j)
        parsed = []
        for sample in response.samples:
            try:
                parsed.append(parse_llm_fields(sample))
            except MissingField as exc:
                hop.notes.append(f"sample dropped: {exc}")
        if not parsed:
            hop.notes.append("hop aborted: no sample produced a search query")
            hop.context = RankedContext(question=question, items=[])
            trace.hops.append(hop)
            contexts.append(hop.context)
            continue

        primary = parsed[0]
        hop.rationale = primary.rationale
        hop.query_entity = primary.query_entity
        hop.sparql_text = primary.sparql_text
        hop.search_queries = _dedupe([p.search_query for p in parsed])

        pool: list[EvidenceCandidate] = []
        for q in hop.search_queries:
            pool.extend(toolset.retrieve(j, q, trace))
        pool.extend(toolset.run_symbolic(j, hop, hop.search_queries[0], trace))
        hop.context = fuse_and_rank(hop.search_queries[0], pool, config.context_size, toolset.scorer)
        trace.hops.append(hop)
        contexts.append(hop.context)

    trace.final_rationale, trace.answer = _final_call(question, contexts, config, toolset)
    trace.llm_call_count += 1
    return trace.answer, trace
