"""HTTP clients for chat, embedding and reranking services.

Chat and embeddings speak the common ``/chat/completions`` and
``/embeddings`` JSON interface. Reranking uses a minimal contract::

    POST {base}/rerank  {"model", "query", "documents", "max_length"}
    -> {"scores": [float, ...]}   # one per document, input order
"""

from __future__ import annotations

import logging
import threading
import time
from typing import Callable, Sequence

import httpx
import numpy as np

from ..corpus.tokenizers import count_tokens
from ..errors import InputError, ProviderError
from .config import ProviderConfig
from .ratelimit import RateLimiter

log = logging.getLogger(__name__)

TRANSIENT_STATUS = frozenset({408, 409, 425, 429, 500, 502, 503, 504})


class _Transport:
    def __init__(self, config: ProviderConfig, client: httpx.Client | None = None,
                 sleep: Callable[[float], None] = time.sleep,
                 limiter: RateLimiter | None = None):
        self.config = config
        self.sleep = sleep
        headers = {"Content-Type": "application/json"}
        if config.api_key:
            headers["Authorization"] = f"Bearer {config.api_key}"
        self.client = client or httpx.Client(timeout=config.timeout)
        self.headers = headers
        self.limiter = limiter or RateLimiter(config.rate_limit, sleep=sleep)
        self._slots = threading.BoundedSemaphore(config.max_concurrency)
        self.attempts = 0

    def url(self) -> str:
        return self.config.base_url.rstrip("/") + self.config.path

    def post(self, payload: dict) -> dict:
        cfg = self.config
        last_status = None
        last_exc: Exception | None = None
        delay = cfg.backoff_initial
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                self.sleep(delay)
                delay *= cfg.backoff_multiplier
            self.limiter.acquire()
            self.attempts += 1
            try:
                with self._slots:
                    resp = self.client.post(self.url(), json=payload, headers=self.headers,
                                            timeout=cfg.timeout)
            except httpx.TransportError as e:
                last_exc, last_status = e, None
                log.warning("transport error on %s (attempt %d): %s", self.url(), attempt + 1, e)
                continue
            if resp.status_code in TRANSIENT_STATUS:
                last_status = resp.status_code
                log.warning("status %d from %s (attempt %d)", resp.status_code, self.url(), attempt + 1)
                continue
            if resp.status_code >= 400:
                raise ProviderError(f"request to {self.url()} failed: {resp.text[:200]}",
                                    status=resp.status_code, attempts=attempt + 1)
            try:
                return resp.json()
            except ValueError:
                raise ProviderError(f"non-JSON response from {self.url()}",
                                    status=resp.status_code, attempts=attempt + 1) from None
        msg = f"retries exhausted for {self.url()}"
        if last_exc is not None:
            msg += f": {last_exc}"
        raise ProviderError(msg, status=last_status, attempts=cfg.max_retries + 1)


class HttpChatClient:
    def __init__(self, config: ProviderConfig, client: httpx.Client | None = None,
                 sleep: Callable[[float], None] = time.sleep, temperature: float = 0.8,
                 max_tokens: int | None = None):
        self.config = config
        self.temperature = temperature
        self.max_tokens = max_tokens
        self.transport = _Transport(config, client, sleep)

    def chat_complete(self, prompt: str, temperature: float | None = None,
                      max_tokens: int | None = None) -> str:
        if not prompt:
            raise InputError("empty prompt")
        n = count_tokens(prompt)
        if n > self.config.max_input_tokens:
            raise InputError(f"prompt has {n} tokens, limit is {self.config.max_input_tokens}")
        payload = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature if temperature is None else temperature,
        }
        mt = self.max_tokens if max_tokens is None else max_tokens
        if mt is not None:
            payload["max_tokens"] = mt
        body = self.transport.post(payload)
        try:
            return body["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError):
            raise ProviderError("malformed chat response") from None


class HttpEmbeddingClient:
    def __init__(self, config: ProviderConfig, client: httpx.Client | None = None,
                 sleep: Callable[[float], None] = time.sleep, extra_body: dict | None = None):
        self.config = config
        self.extra_body = dict(extra_body or {})
        self.transport = _Transport(config, client, sleep)

    def _embed_batch(self, texts: list[str]) -> list[list[float]]:
        body = self.transport.post({"model": self.config.model_name, "input": texts, **self.extra_body})
        try:
            data = sorted(body["data"], key=lambda d: d.get("index", 0))
            vecs = [d["embedding"] for d in data]
        except (KeyError, TypeError):
            raise ProviderError("malformed embedding response") from None
        if len(vecs) != len(texts):
            raise ProviderError(f"expected {len(texts)} embeddings, got {len(vecs)}")
        return vecs

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        texts = list(texts)
        if not texts:
            return np.zeros((0, 0))
        vecs: list[list[float]] = []
        bs = self.config.batch_size
        for i in range(0, len(texts), bs):
            vecs.extend(self._embed_batch(texts[i:i + bs]))
        dims = {len(v) for v in vecs}
        if len(dims) != 1:
            raise ProviderError(f"embedding dimension mismatch: {sorted(dims)}")
        return np.asarray(vecs, dtype=np.float64)


class HttpRerankClient:
    def __init__(self, config: ProviderConfig, client: httpx.Client | None = None,
                 sleep: Callable[[float], None] = time.sleep, name: str | None = None):
        self.config = config
        self.name = name or config.model_name or "reranker"
        self.transport = _Transport(config, client, sleep)

    def rerank_score(self, query: str, docs: Sequence[str]) -> list[float]:
        docs = list(docs)
        if not docs:
            raise InputError("rerank needs at least one document")
        scores: list[float] = []
        bs = self.config.batch_size
        for i in range(0, len(docs), bs):
            part = docs[i:i + bs]
            body = self.transport.post({
                "model": self.config.model_name,
                "query": query,
                "documents": part,
                "max_length": self.config.max_input_tokens,
            })
            got = body.get("scores") if isinstance(body, dict) else None
            if not isinstance(got, list) or len(got) != len(part):
                raise ProviderError("malformed rerank response")
            scores.extend(float(s) for s in got)
        return scores
