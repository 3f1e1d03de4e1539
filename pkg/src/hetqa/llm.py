"""Uniform access to text-generation providers.

Two providers ship here: a live chat-completions HTTP client (configured via
``HETQA_LLM_URL`` / ``HETQA_LLM_MODEL`` / ``HETQA_LLM_KEY``) and a scripted
provider that replays canned responses for tests. Scripted runs are
bit-reproducible; live runs can be recorded to a replay file and replayed
forever after.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import requests

from .errors import FixtureMiss, ProviderUnavailable

logger = logging.getLogger(__name__)

ENV_URL = "HETQA_LLM_URL"
ENV_MODEL = "HETQA_LLM_MODEL"
ENV_KEY = "HETQA_LLM_KEY"


@dataclass
class GenerationRequest:
    prompt: str
    temperature: float = 0.0
    max_tokens: int = 512
    n_samples: int = 1

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1 or self.n_samples < 1:
            raise ValueError("max_tokens and n_samples must be positive")


@dataclass
class GenerationResponse:
    samples: list[str]
    provider_name: str
    latency: float


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


@dataclass
class _FixtureEntry:
    matcher: str
    responses: list[str]
    cursor: int = 0

    def remaining(self) -> int:
        return len(self.responses) - self.cursor

    def matches(self, prompt: str, digest: str) -> bool:
        if self.matcher.startswith("sha256:"):
            return self.matcher[len("sha256:") :] == digest
        return self.matcher in prompt


class ScriptedProvider:
    """Replays canned responses, matched by the first fixture entry whose
    substring occurs in the prompt and which still has responses left.

    At temperature 0 a single response is consumed and replicated across the
    requested samples, so temperature-0 calls are always uniform.
    """

    def __init__(self, entries: Sequence[tuple[str, Sequence[str]]], name: str = "scripted"):
        self.entries = [_FixtureEntry(m, list(rs)) for m, rs in entries]
        self.name = name
        self._lock = threading.Lock()

    @classmethod
    def load(cls, path: str | Path, name: str = "scripted") -> "ScriptedProvider":
        entries = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                entries.append((rec["matcher"], rec["responses"]))
        return cls(entries, name=name)

    def complete(self, request: GenerationRequest) -> list[str]:
        digest = prompt_digest(request.prompt)
        with self._lock:
            needed = 1 if request.temperature == 0 else request.n_samples
            for entry in self.entries:
                if entry.remaining() >= needed and entry.matches(request.prompt, digest):
                    taken = entry.responses[entry.cursor : entry.cursor + needed]
                    entry.cursor += needed
                    if request.temperature == 0:
                        return taken * request.n_samples
                    return list(taken)
        raise FixtureMiss(digest, request.prompt[:60])


class HttpChatProvider:
    """Chat-completions-style HTTP client with retry on transient failures."""

    def __init__(
        self,
        base_url: Optional[str] = None,
        model: Optional[str] = None,
        api_key: Optional[str] = None,
        max_retries: int = 3,
        backoff: float = 0.5,
        timeout: float = 60.0,
        session=None,
    ):
        self.base_url = base_url or os.environ.get(ENV_URL, "")
        self.model = model or os.environ.get(ENV_MODEL, "")
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_KEY, "")
        if not self.base_url:
            raise ProviderUnavailable(f"no LLM endpoint configured (set {ENV_URL})")
        self.max_retries = max_retries
        self.backoff = backoff
        self.timeout = timeout
        self.session = session or requests.Session()
        self.name = f"http:{self.model or self.base_url}"

    def complete(self, request: GenerationRequest) -> list[str]:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "n": request.n_samples,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.max_retries):
            try:
                resp = self.session.post(
                    self.base_url, json=payload, headers=headers, timeout=self.timeout
                )
                if resp.status_code >= 500:
                    raise requests.RequestException(f"server error {resp.status_code}")
                if resp.status_code != 200:
                    raise ProviderUnavailable(f"LLM endpoint returned {resp.status_code}")
                body = resp.json()
                samples = [choice["message"]["content"] for choice in body["choices"]]
                if len(samples) < request.n_samples:
                    samples += [samples[-1]] * (request.n_samples - len(samples))
                return samples[: request.n_samples]
            except requests.RequestException as exc:
                last_error = exc
                if attempt + 1 < self.max_retries:
                    time.sleep(self.backoff * (2**attempt))
        raise ProviderUnavailable(f"LLM endpoint unreachable after {self.max_retries} attempts: {last_error}")


class RecordingProvider:
    """Wraps a live provider and appends each request/response pair to a replay file."""

    def __init__(self, inner, path: str | Path):
        self.inner = inner
        self.path = Path(path)
        self.name = f"recording({inner.name})"
        self._lock = threading.Lock()

    def complete(self, request: GenerationRequest) -> list[str]:
        samples = self.inner.complete(request)
        record = {
            "matcher": f"sha256:{prompt_digest(request.prompt)}",
            "responses": samples,
        }
        with self._lock, open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        return samples


def generate(request: GenerationRequest, provider) -> GenerationResponse:
    """Run one generation through a provider, verifying prompt pass-through."""
    digest = prompt_digest(request.prompt)
    logger.debug("llm call sha256:%s n=%d t=%.2f", digest, request.n_samples, request.temperature)
    started = time.perf_counter()
    samples = provider.complete(request)
    latency = time.perf_counter() - started
    if len(samples) != request.n_samples:
        raise ProviderUnavailable(
            f"provider returned {len(samples)} samples, wanted {request.n_samples}"
        )
    return GenerationResponse(samples=list(samples), provider_name=provider.name, latency=latency)
