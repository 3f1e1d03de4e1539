"""Entity linking for query-entity mentions, plus symbolic-query repair.

Candidates come from exact label match, then alias match, then a token-overlap
fuzzy match; when an embedding provider is available, disambiguation prefers
the candidate whose description is most similar to the querying question.
The linker never fabricates ids — a chosen entity always exists in the catalog.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import NoEntityMatch
from .kb import Entity, TripleStore, id_number
from .sparql import EntityRef, RelationRef, SparqlQuery, TriplePattern
from .textindex import tokenize

logger = logging.getLogger(__name__)

CANDIDATE_CAP = 10
FUZZY_JACCARD_MIN = 0.5


@dataclass
class LinkCandidate:
    entity: Entity
    lexical_score: float
    description_score: float
    method: str  # "exact_label" | "alias" | "fuzzy"

    def final_score(self, use_descriptions: bool) -> float:
        return self.description_score if use_descriptions else self.lexical_score


@dataclass
class LinkResult:
    chosen: Optional[str]
    candidates: list[LinkCandidate]
    method: Optional[str] = None


def _jaccard(a: set[str], b: set[str]) -> float:
    union = a | b
    return len(a & b) / len(union) if union else 0.0


def _lexical_score(mention_tokens: set[str], entity: Entity) -> float:
    names = [entity.label, *entity.aliases]
    return max(_jaccard(mention_tokens, set(tokenize(name))) for name in names)


def link(mention: str, context_query: str, store: TripleStore, provider=None) -> LinkResult:
    """Map a mention to a catalog entity id, disambiguating by description.

    With a provider, candidates are ranked by cosine similarity between
    ``context_query`` and each candidate's description; otherwise by lexical
    overlap with the mention. An absent ``chosen`` means no match was found.
    """
    if not mention.strip():
        raise ValueError("mention must be non-empty")

    found: dict[str, str] = {}  # qid -> method, first (strongest) tier wins
    for qid in store.entities_by_label(mention):
        found.setdefault(qid, "exact_label")
    for qid in store.entities_by_alias(mention):
        found.setdefault(qid, "alias")
    mention_tokens = set(tokenize(mention))
    if mention_tokens:
        for qid in sorted(store.entities, key=id_number):
            if qid in found:
                continue
            entity = store.entities[qid]
            names = [entity.label, *entity.aliases]
            if any(_jaccard(mention_tokens, set(tokenize(n))) >= FUZZY_JACCARD_MIN for n in names):
                found[qid] = "fuzzy"

    candidates = [
        LinkCandidate(
            entity=store.entities[qid],
            lexical_score=_lexical_score(mention_tokens, store.entities[qid]),
            description_score=0.0,
            method=method,
        )
        for qid, method in found.items()
    ]
    if not candidates:
        return LinkResult(chosen=None, candidates=[])

    use_descriptions = provider is not None
    if use_descriptions:
        texts = [context_query] + [c.entity.description for c in candidates]
        vectors = np.asarray(provider.embed(texts), dtype=np.float64)
        norms = np.linalg.norm(vectors, axis=1)
        norms[norms == 0.0] = 1.0
        vectors = vectors / norms[:, None]
        sims = vectors[1:] @ vectors[0]
        for cand, sim in zip(candidates, sims):
            cand.description_score = float(np.clip(sim, -1.0, 1.0))

    candidates.sort(key=lambda c: (-c.final_score(use_descriptions), id_number(c.entity.id)))
    candidates = candidates[:CANDIDATE_CAP]
    top = candidates[0]
    return LinkResult(chosen=top.entity.id, candidates=candidates, method=top.method)


def _best_relation(query_tokens: set[str], store: TripleStore) -> Optional[str]:
    """Relation whose label/alias tokens are best covered by the query words."""
    best_pid = None
    best_cov = 0.0
    for pid in sorted(store.relations, key=id_number):
        rel = store.relations[pid]
        for name in [rel.label, *rel.aliases]:
            toks = set(tokenize(name))
            if not toks:
                continue
            cov = len(toks & query_tokens) / len(toks)
            if cov > best_cov:
                best_cov, best_pid = cov, pid
    return best_pid if best_cov >= 0.5 else None


def repair_sparql(
    query: SparqlQuery, link_result: LinkResult, store: TripleStore, search_query: str = ""
) -> SparqlQuery:
    """Rewrite a generated query with the linked entity id.

    Every entity-ref subject is replaced by the chosen id; predicates unknown
    to the catalog are re-linked against the search query's words when a
    label/alias match exists, and left intact otherwise.
    """
    if link_result.chosen is None:
        raise NoEntityMatch("cannot repair query without a linked entity")

    query_tokens = set(tokenize(search_query))
    patterns = []
    for p in query.patterns:
        subject = EntityRef(link_result.chosen) if isinstance(p.subject, EntityRef) else p.subject
        predicate = p.predicate
        if isinstance(predicate, RelationRef) and predicate.pid not in store.relations:
            replacement = _best_relation(query_tokens, store) if query_tokens else None
            if replacement is not None:
                logger.info("repaired unknown predicate %s -> %s", predicate.pid, replacement)
                predicate = RelationRef(replacement)
        patterns.append(TriplePattern(subject, predicate, p.obj))
    return replace(query, patterns=tuple(patterns))
