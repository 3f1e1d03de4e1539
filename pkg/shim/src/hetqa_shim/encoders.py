"""Embedding and relevance backends.

Two families are supported: off-the-shelf sentence-transformers checkpoints
(an unsupervised contrastive sentence encoder for embeddings and the
ms-marco MiniLM cross-encoder for relevance), selected via environment
variables, and deterministic offline fallbacks that need no downloads. The
fallbacks are the default so the service always starts, even air-gapped.
"""

from __future__ import annotations

import hashlib
import logging
import os
import re
from typing import Protocol, Sequence

import numpy as np

logger = logging.getLogger(__name__)

ENV_EMBED_MODEL = "HETQA_SHIM_EMBED_MODEL"
ENV_RERANK_MODEL = "HETQA_SHIM_RERANK_MODEL"

# checkpoints wrapped when the corresponding env var requests them
SUGGESTED_EMBED_CHECKPOINT = "facebook/contriever"
SUGGESTED_RERANK_CHECKPOINT = "cross-encoder/ms-marco-MiniLM-L-6-v2"

_TOKEN_RE = re.compile(r"[^0-9a-z]+")


def _tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_RE.split(text.casefold()) if t]


class Embedder(Protocol):
    name: str
    dim: int

    def encode(self, texts: Sequence[str]) -> np.ndarray: ...


class Reranker(Protocol):
    name: str

    def score(self, query: str, candidates: Sequence[str]) -> list[float]: ...


class HashedEncoder:
    """Feature-hashed bag-of-words embeddings; deterministic, no model files."""

    def __init__(self, dim: int = 384):
        self.dim = dim
        self.name = f"hashed-bow-{dim}"

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim))
        for row, text in enumerate(texts):
            for token in _tokenize(text):
                digest = hashlib.sha256(token.encode("utf-8")).digest()
                idx = int.from_bytes(digest[:4], "big") % self.dim
                sign = 1.0 if digest[4] % 2 == 0 else -1.0
                out[row, idx] += sign
        norms = np.linalg.norm(out, axis=1)
        for row in range(len(texts)):
            if norms[row] == 0.0:
                out[row, 0] = 1.0
            else:
                out[row] /= norms[row]
        return out


class LexicalReranker:
    """Token-overlap relevance; a stand-in for the cross-encoder checkpoint."""

    name = "lexical-overlap"

    def score(self, query: str, candidates: Sequence[str]) -> list[float]:
        q = set(_tokenize(query))
        scores = []
        for text in candidates:
            t = set(_tokenize(text))
            union = q | t
            scores.append(len(q & t) / len(union) if union else 0.0)
        return scores


class SentenceTransformerEncoder:
    def __init__(self, checkpoint: str):
        from sentence_transformers import SentenceTransformer

        self._model = SentenceTransformer(checkpoint)
        self.name = checkpoint
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        vectors = self._model.encode(list(texts), convert_to_numpy=True, normalize_embeddings=True)
        return np.asarray(vectors, dtype=np.float64)


class CrossEncoderReranker:
    def __init__(self, checkpoint: str):
        from sentence_transformers import CrossEncoder

        self._model = CrossEncoder(checkpoint)
        self.name = checkpoint

    def score(self, query: str, candidates: Sequence[str]) -> list[float]:
        pairs = [(query, text) for text in candidates]
        return [float(s) for s in self._model.predict(pairs)]


def build_embedder() -> Embedder:
    checkpoint = os.environ.get(ENV_EMBED_MODEL, "")
    if checkpoint and not checkpoint.startswith("hashed"):
        try:
            return SentenceTransformerEncoder(checkpoint)
        except Exception as exc:
            logger.warning("cannot load embed checkpoint %r (%s); using hashed fallback", checkpoint, exc)
    return HashedEncoder()


def build_reranker() -> Reranker:
    checkpoint = os.environ.get(ENV_RERANK_MODEL, "")
    if checkpoint and not checkpoint.startswith("lexical"):
        try:
            return CrossEncoderReranker(checkpoint)
        except Exception as exc:
            logger.warning("cannot load rerank checkpoint %r (%s); using lexical fallback", checkpoint, exc)
    return LexicalReranker()
