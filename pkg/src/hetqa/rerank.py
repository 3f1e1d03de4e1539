"""Fuse evidence from heterogeneous retrievers and keep the top-k most relevant.

Candidates from all retrieval routes (symbolic query results included) compete
in one pool under a single context budget; a cross-encoder-style scorer rates
each against the single-hop question, with a lexical fallback so the pipeline
stays runnable offline.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import ScorerUnavailable
from .providers import LexicalScorer

logger = logging.getLogger(__name__)

DEFAULT_CONTEXT_SIZE = 3

# Tie-break precedence between sources at equal relevance.
SOURCE_ORDER = {"sparql": 0, "sparse_kb": 1, "dense_text": 2}


@dataclass
class EvidenceCandidate:
    key: str  # passage id, or the canonical rendering for symbolic results
    text: str
    source: str  # "dense_text" | "sparse_kb" | "sparql"
    originating_query: str
    relevance: Optional[float] = None


@dataclass
class RankedContext:
    question: str
    items: list[EvidenceCandidate] = field(default_factory=list)


def fuse_and_rank(
    question: str,
    pools: Sequence[EvidenceCandidate],
    k: int,
    scorer,
) -> RankedContext:
    """Dedup by key, score every survivor against the question, keep top-k.

    Ties break by source order (sparql, sparse_kb, dense_text) then key. If
    the scorer is unavailable the pool is scored by lexical token overlap
    instead, with a logged warning.
    """
    if k < 1:
        raise ValueError("k must be >= 1")

    by_key: dict[str, EvidenceCandidate] = {}
    for cand in pools:
        held = by_key.get(cand.key)
        if held is None or (cand.relevance or 0.0) > (held.relevance or 0.0):
            by_key[cand.key] = cand
    survivors = [
        EvidenceCandidate(c.key, c.text, c.source, c.originating_query, c.relevance)
        for c in by_key.values()
    ]
    if not survivors:
        return RankedContext(question=question, items=[])

    texts = [c.text for c in survivors]
    try:
        scores = scorer.score(question, texts)
    except ScorerUnavailable as exc:
        logger.warning("relevance scorer unavailable (%s); falling back to lexical overlap", exc)
        scores = LexicalScorer().score(question, texts)
    for cand, score in zip(survivors, scores):
        cand.relevance = float(score)

    survivors.sort(key=lambda c: (-(c.relevance or 0.0), SOURCE_ORDER.get(c.source, 99), c.key))
    return RankedContext(question=question, items=survivors[:k])
