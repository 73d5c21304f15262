"""Provider contracts consumed by the pipeline.

Any object with the right method satisfies a contract; the HTTP clients,
mocks and transcript wrappers in this package are interchangeable.
"""

from __future__ import annotations

from typing import Protocol, Sequence, runtime_checkable

import numpy as np


@runtime_checkable
class ChatProvider(Protocol):
    def chat_complete(self, prompt: str, temperature: float | None = None,
                      max_tokens: int | None = None) -> str: ...


@runtime_checkable
class EmbeddingProvider(Protocol):
    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


@runtime_checkable
class RerankProvider(Protocol):
    name: str

    def rerank_score(self, query: str, docs: Sequence[str]) -> list[float]: ...
