"""Sparse (Okapi BM25) and dense (cosine) retrieval over passages.

Structured knowledge enters retrieval by linearizing each triple into the flat
string "subject relation object" and indexing it like any other passage.
Tokenization is deliberately plain — case-fold, split on non-alphanumerics, no
stemming or stopwords — so scores stay reproducible.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, DuplicateId
from .kb import Triple, TripleStore

BM25_K1 = 1.2
BM25_B = 0.75

_TOKEN_RE = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list[str]:
    return [tok for tok in _TOKEN_RE.split(text.casefold()) if tok]


@dataclass(frozen=True)
class Passage:
    id: str
    title: str
    body: str
    origin: str = "wiki_text"  # or "linearized_triple"
    source_triple: Optional[Triple] = None

    @property
    def search_text(self) -> str:
        return f"{self.title} {self.body}".strip() if self.title else self.body


@dataclass(frozen=True)
class ScoredHit:
    passage_id: str
    score: float
    retriever: str  # "sparse" | "dense"


def linearized_id(triple: Triple) -> str:
    kind = "e" if triple.obj_is_entity else "l"
    return f"kb:{triple.subject}|{triple.predicate}|{kind}|{triple.obj}"


def linearize(triple: Triple, store: TripleStore) -> Passage:
    """Flatten a triple into a "subject relation object" passage."""
    obj = store.entity_label(triple.obj) if triple.obj_is_entity else triple.obj
    body = f"{store.entity_label(triple.subject)} {store.relation_label(triple.predicate)} {obj}"
    return Passage(
        id=linearized_id(triple),
        title="",
        body=body,
        origin="linearized_triple",
        source_triple=triple,
    )


class SparseIndex:
    """Inverted index with the statistics BM25 needs."""

    def __init__(self, corpus: Sequence[Passage]):
        self.passages = {p.id: p for p in corpus}
        if len(self.passages) != len(corpus):
            seen: set[str] = set()
            for p in corpus:
                if p.id in seen:
                    raise DuplicateId(p.id)
                seen.add(p.id)
        self.postings: dict[str, list[tuple[str, int]]] = {}
        self.doc_lengths: dict[str, int] = {}
        for p in corpus:
            tokens = tokenize(p.search_text)
            self.doc_lengths[p.id] = len(tokens)
            for term, tf in sorted(Counter(tokens).items()):
                self.postings.setdefault(term, []).append((p.id, tf))
        self.doc_count = len(corpus)
        self.avg_doc_length = (
            sum(self.doc_lengths.values()) / self.doc_count if self.doc_count else 0.0
        )

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        if df == 0:
            return 0.0
        return max(0.0, math.log((self.doc_count - df + 0.5) / (df + 0.5)))


def build_sparse(corpus: Sequence[Passage]) -> SparseIndex:
    return SparseIndex(corpus)


def search_sparse(index: SparseIndex, query: str, k: int) -> list[ScoredHit]:
    """Top-k passages by Okapi BM25; only positive scores are returned."""
    if k < 1:
        raise ValueError("k must be >= 1")
    scores: dict[str, float] = {}
    for term in dict.fromkeys(tokenize(query)):  # unique terms: set-based Okapi sum
        idf = index.idf(term)
        for pid, tf in index.postings.get(term, ()):
            dl = index.doc_lengths[pid]
            denom = tf + BM25_K1 * (1 - BM25_B + BM25_B * dl / index.avg_doc_length)
            scores[pid] = scores.get(pid, 0.0) + idf * tf * (BM25_K1 + 1) / denom
    hits = [
        ScoredHit(pid, score, "sparse")
        for pid, score in scores.items()
        if score > 0.0
    ]
    hits.sort(key=lambda h: (-h.score, h.passage_id))
    return hits[:k]


class DenseIndex:
    def __init__(self, ids: list[str], matrix: np.ndarray, provider_name: str):
        self.ids = ids
        self.matrix = matrix
        self.dim = int(matrix.shape[1]) if matrix.size else 0
        self.provider_name = provider_name


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return matrix / norms


def embed_corpus(corpus: Sequence[Passage], provider, batch_size: int = 64) -> DenseIndex:
    """One unit-norm vector per passage, embedded through the provider."""
    ids = [p.id for p in corpus]
    if len(set(ids)) != len(ids):
        raise DuplicateId(next(i for i in ids if ids.count(i) > 1))
    vectors: list[list[float]] = []
    texts = [p.search_text for p in corpus]
    for start in range(0, len(texts), batch_size):
        vectors.extend(provider.embed(texts[start : start + batch_size]))
    if not vectors:
        return DenseIndex(ids, np.zeros((0, 0)), provider.name)
    dims = {len(v) for v in vectors}
    if len(dims) > 1:
        raise DimensionMismatch(len(vectors[0]), (dims - {len(vectors[0])}).pop())
    matrix = _normalize_rows(np.asarray(vectors, dtype=np.float64))
    return DenseIndex(ids, matrix, provider.name)


def search_dense(index: DenseIndex, query: str, k: int, provider) -> list[ScoredHit]:
    """Top-k passages by cosine similarity, via an exact scan."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not index.ids:
        return []
    qvec = np.asarray(provider.embed([query])[0], dtype=np.float64)
    if qvec.shape[0] != index.dim:
        raise DimensionMismatch(index.dim, int(qvec.shape[0]))
    norm = np.linalg.norm(qvec)
    if norm > 0:
        qvec = qvec / norm
    sims = np.clip(index.matrix @ qvec, -1.0, 1.0)
    hits = [ScoredHit(pid, float(s), "dense") for pid, s in zip(index.ids, sims)]
    hits.sort(key=lambda h: (-h.score, h.passage_id))
    return hits[:k]


def load_passages(path) -> list[Passage]:
    """Read a line-delimited {"id", "title", "text"} passage corpus."""
    import json

    from .errors import MalformedRecord

    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(str(path), line_no, f"invalid JSON: {exc.msg}")
            if "id" not in rec or "text" not in rec:
                raise MalformedRecord(str(path), line_no, "passage needs 'id' and 'text'")
            out.append(Passage(id=rec["id"], title=rec.get("title", ""), body=rec["text"]))
    return out
