"""Corpus preparation: length filtering, long-document chunking, stats."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from ..errors import ConfigError, EmptyInputError
from ..records import Document, Origin
from .tokenizers import Tokenizer, get_tokenizer

log = logging.getLogger(__name__)

DEFAULT_MIN_TOKENS = 20
DEFAULT_MAX_TOKENS = 8192
DEFAULT_CHUNK_SIZE = 200
DEFAULT_CHUNK_OVERLAP = 50


def filter_documents(
    docs: Iterable[Document],
    min_tokens: int = DEFAULT_MIN_TOKENS,
    max_tokens: float | None = DEFAULT_MAX_TOKENS,
    tokenizer: Tokenizer | str | None = None,
) -> Iterator[Document]:
    """Yield documents whose token count lies in ``[min_tokens, max_tokens]``.

    ``max_tokens=None`` (or ``math.inf``) disables the upper bound. Order is
    preserved.
    """
    hi = math.inf if max_tokens is None else max_tokens
    if min_tokens < 0 or hi < min_tokens:
        raise ConfigError(f"invalid token bounds: min={min_tokens}, max={max_tokens}")
    tok = get_tokenizer(tokenizer)
    for doc in docs:
        n = len(tok.tokenize(doc.text))
        if min_tokens <= n <= hi:
            yield doc


def chunk_windows(n_tokens: int, chunk_size: int, overlap: int) -> list[tuple[int, int]]:
    """Half-open token windows ``[start, end)`` covering ``n_tokens`` tokens."""
    if chunk_size <= 0:
        raise ConfigError("chunk_size must be positive")
    if not 0 <= overlap < chunk_size:
        raise ConfigError(f"overlap must satisfy 0 <= overlap < chunk_size, got {overlap}")
    stride = chunk_size - overlap
    windows = []
    start = 0
    while True:
        end = min(start + chunk_size, n_tokens)
        windows.append((start, end))
        if start + chunk_size >= n_tokens:
            return windows
        start += stride


def chunk_long_document(
    text: str,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    overlap: int = DEFAULT_CHUNK_OVERLAP,
    tokenizer: Tokenizer | str | None = None,
    parent_id: str = "doc",
    title: str = "",
) -> list[Document]:
    """Split ``text`` into overlapping fixed-size token windows.

    Chunk text is sliced from the original string between the first and
    last token of each window, so casing and inner punctuation survive.
    """
    if not 0 <= overlap < chunk_size:
        raise ConfigError(f"overlap must satisfy 0 <= overlap < chunk_size, got {overlap}")
    if not text or not text.strip():
        raise EmptyInputError("cannot chunk empty text")
    tok = get_tokenizer(tokenizer)
    spans = tok.spans(text)
    if not spans:
        raise EmptyInputError("text contains no tokens")
    chunks = []
    for i, (s, e) in enumerate(chunk_windows(len(spans), chunk_size, overlap)):
        piece = text[spans[s][0]:spans[e - 1][1]]
        chunks.append(
            Document(
                id=f"{parent_id}-chunk-{i}",
                text=piece,
                title=title,
                origin=Origin.LONG_DOC_CHUNK,
                source_meta={
                    "parent_id": parent_id,
                    "chunk_index": str(i),
                    "token_start": str(s),
                    "token_end": str(e),
                },
            )
        )
    return chunks


def redact(docs: Iterable[Document], hook: Callable[[Document], Document | None] | None = None
           ) -> Iterator[Document]:
    """Optional personal-data / offensive-content pass.

    Without a hook this is the identity. A hook may return a modified
    document or ``None`` to drop it.
    """
    for doc in docs:
        if hook is None:
            yield doc
            continue
        out = hook(doc)
        if out is not None:
            yield out


@dataclass
class CorpusStats:
    doc_count: int = 0
    avg_tokens: float = 0.0
    token_histogram: dict[str, int] = field(default_factory=dict)


_BUCKETS = (0, 50, 100, 200, 500, 1000, 2000, 5000, 10000)


def _bucket(n: int) -> str:
    for lo, hi in zip(_BUCKETS, _BUCKETS[1:]):
        if lo <= n < hi:
            return f"{lo}-{hi - 1}"
    return f"{_BUCKETS[-1]}+"


def corpus_stats(docs: Iterable[Document], tokenizer: Tokenizer | str | None = None) -> CorpusStats:
    tok = get_tokenizer(tokenizer)
    counts = [len(tok.tokenize(d.text)) for d in docs]
    if not counts:
        return CorpusStats()
    hist = Counter(_bucket(n) for n in counts)
    ordered = {b: hist[b] for b in sorted(hist, key=lambda b: int(b.split("-")[0].rstrip("+")))}
    return CorpusStats(len(counts), sum(counts) / len(counts), ordered)


def seed_documents(texts: Iterable[str | tuple[str, str]], source: str = "doc") -> Iterator[Document]:
    """Wrap raw texts as seed documents with ids ``<source>-<counter>``.

    Items may be plain text or ``(title, text)`` pairs. Blank texts are
    skipped.
    """
    i = 0
    for item in texts:
        title, text = ("", item) if isinstance(item, str) else item
        if not text.strip():
            continue
        yield Document(id=f"{source}-{i}", text=text, title=title)
        i += 1
