"""Embedding and relevance providers: deterministic offline stubs plus HTTP clients.

The engine never requires a model server. ``HashEmbedder`` and
``LexicalScorer`` keep every pipeline runnable (and bit-reproducible) offline;
the HTTP clients speak the model-shim wire contract when one is available.
"""

from __future__ import annotations

import hashlib
import logging
from typing import Protocol, Sequence

import numpy as np
import requests

from .errors import ProviderUnavailable, ScorerUnavailable
from .textindex import tokenize

logger = logging.getLogger(__name__)


class EmbeddingProvider(Protocol):
    name: str

    def embed(self, texts: Sequence[str]) -> list[list[float]]: ...


class RelevanceScorer(Protocol):
    name: str

    def score(self, query: str, texts: Sequence[str]) -> list[float]: ...


class HashEmbedder:
    """Feature-hashed bag-of-words embedding; deterministic across runs.

    Cosine similarity approximates token overlap, which is all the offline
    test fixtures rely on.
    """

    def __init__(self, dim: int = 256):
        self.dim = dim
        self.name = f"hashed-bow-{dim}"

    def _token_slot(self, token: str) -> tuple[int, float]:
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        idx = int.from_bytes(digest[:4], "big") % self.dim
        sign = 1.0 if digest[4] % 2 == 0 else -1.0
        return idx, sign

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        out = []
        for text in texts:
            vec = np.zeros(self.dim)
            for token in tokenize(text):
                idx, sign = self._token_slot(token)
                vec[idx] += sign
            norm = np.linalg.norm(vec)
            if norm == 0.0:
                vec[0] = 1.0
            else:
                vec = vec / norm
            out.append(vec.tolist())
        return out


class LexicalScorer:
    """Normalized token-overlap relevance; the offline reranking fallback."""

    name = "lexical-overlap"

    def score(self, query: str, texts: Sequence[str]) -> list[float]:
        q = set(tokenize(query))
        scores = []
        for text in texts:
            t = set(tokenize(text))
            union = q | t
            scores.append(len(q & t) / len(union) if union else 0.0)
        return scores


class HttpEmbedder:
    """Client for the model shim's POST /embed endpoint."""

    def __init__(self, base_url: str, timeout: float = 30.0, session=None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.session = session or requests.Session()
        self.name = f"http:{self.base_url}"

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        try:
            resp = self.session.post(
                f"{self.base_url}/embed", json={"texts": list(texts)}, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise ProviderUnavailable(f"embed endpoint unreachable: {exc}")
        if resp.status_code != 200:
            raise ProviderUnavailable(f"embed endpoint returned {resp.status_code}")
        return resp.json()["vectors"]


class HttpRerankScorer:
    """Client for the model shim's POST /rerank endpoint."""

    def __init__(self, base_url: str, timeout: float = 30.0, session=None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.session = session or requests.Session()
        self.name = f"http:{self.base_url}"

    def score(self, query: str, texts: Sequence[str]) -> list[float]:
        try:
            resp = self.session.post(
                f"{self.base_url}/rerank",
                json={"query": query, "candidates": list(texts)},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise ScorerUnavailable(f"rerank endpoint unreachable: {exc}")
        if resp.status_code != 200:
            raise ScorerUnavailable(f"rerank endpoint returned {resp.status_code}")
        return resp.json()["scores"]
