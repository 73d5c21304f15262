"""Deterministic offline providers for tests and dry runs."""

from __future__ import annotations

import hashlib
import threading
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from ..corpus.tokenizers import unicode_tokenizer
from ..errors import ProviderError

_tok = unicode_tokenizer(lowercase=True)


@lru_cache(maxsize=65536)
def _token_set(text: str) -> frozenset[str]:
    return frozenset(_tok.tokenize(text))


def stable_hash(*parts: str) -> int:
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(p.encode("utf-8"))
        h.update(b"\x00")
    return int.from_bytes(h.digest(), "big")


class _Counting:
    def __init__(self):
        self.calls = 0
        self._lock = threading.Lock()

    def _tick(self):
        with self._lock:
            self.calls += 1


class EchoChat(_Counting):
    def chat_complete(self, prompt, temperature=None, max_tokens=None):
        self._tick()
        return prompt


class FunctionChat(_Counting):
    """Reply with ``fn(prompt)``; ``fn`` may raise to simulate failures."""

    def __init__(self, fn: Callable[[str], str]):
        super().__init__()
        self.fn = fn

    def chat_complete(self, prompt, temperature=None, max_tokens=None):
        self._tick()
        return self.fn(prompt)


class ScriptedChat(_Counting):
    """Return canned replies in order. Only deterministic for sequential use."""

    def __init__(self, replies: Iterable[str]):
        super().__init__()
        self.replies = list(replies)
        self.prompts: list[str] = []

    def chat_complete(self, prompt, temperature=None, max_tokens=None):
        with self._lock:
            if self.calls >= len(self.replies):
                raise ProviderError("scripted chat exhausted")
            reply = self.replies[self.calls]
            self.calls += 1
            self.prompts.append(prompt)
        if isinstance(reply, Exception):
            raise reply
        return reply


class HashingEmbedder(_Counting):
    """Bag-of-tokens vectors with each token hashed to one of ``dim`` slots."""

    def __init__(self, dim: int = 256):
        super().__init__()
        self.dim = dim

    def _vec(self, text: str) -> np.ndarray:
        v = np.zeros(self.dim)
        for t in _tok.tokenize(text):
            v[stable_hash(t) % self.dim] += 1.0
        return v

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        self._tick()
        if len(texts) == 0:
            return np.zeros((0, self.dim))
        return np.vstack([self._vec(t) for t in texts])


class TableEmbedder(_Counting):
    def __init__(self, table: Mapping[str, Sequence[float]]):
        super().__init__()
        self.table = {k: np.asarray(v, dtype=float) for k, v in table.items()}

    def embed(self, texts):
        self._tick()
        try:
            return np.vstack([self.table[t] for t in texts]) if len(texts) else np.zeros((0, 0))
        except KeyError as e:
            raise ProviderError(f"no scripted embedding for {e.args[0]!r}") from None


class TokenOverlapReranker(_Counting):
    """Score = fraction of query tokens present in the document.

    ``jitter`` adds a deterministic per-(name, query, doc) perturbation so
    several instances can disagree the way real rerankers do.
    """

    def __init__(self, name: str = "overlap", jitter: float = 0.0):
        super().__init__()
        self.name = name
        self.jitter = jitter

    def rerank_score(self, query, docs):
        self._tick()
        q = _token_set(query)
        out = []
        for d in docs:
            s = len(q & _token_set(d)) / len(q) if q else 0.0
            if self.jitter:
                s += self.jitter * (stable_hash(self.name, query, d) % 10_000) / 10_000
            out.append(s)
        return out


class ConstantReranker(_Counting):
    def __init__(self, value: float = 0.0, name: str = "constant"):
        super().__init__()
        self.value = value
        self.name = name

    def rerank_score(self, query, docs):
        self._tick()
        return [self.value] * len(docs)


class FunctionReranker(_Counting):
    def __init__(self, fn: Callable[[str, str], float], name: str = "function"):
        super().__init__()
        self.fn = fn
        self.name = name

    def rerank_score(self, query, docs):
        self._tick()
        return [float(self.fn(query, d)) for d in docs]


class FailingProvider(_Counting):
    """Raises ProviderError from every method."""

    def __init__(self, name: str = "failing"):
        super().__init__()
        self.name = name

    def _fail(self, *a, **k):
        self._tick()
        raise ProviderError(f"{self.name} is down")

    chat_complete = embed = rerank_score = _fail
