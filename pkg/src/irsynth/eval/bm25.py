"""Okapi BM25 over an in-memory inverted index."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

from ..corpus.tokenizers import Tokenizer, get_tokenizer
from ..errors import EmptyInputError
from ..records import Document, RankedList

DEFAULT_K1 = 0.9
DEFAULT_B = 0.4
DEFAULT_ANALYZER = "unicode-lower"


@dataclass(frozen=True)
class Bm25Index:
    postings: Mapping[str, tuple[tuple[str, int], ...]]
    doc_lengths: Mapping[str, int]
    avgdl: float
    doc_count: int
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B
    tokenizer: Tokenizer | None = None

    def idf(self, term: str) -> float:
        n = len(self.postings.get(term, ()))
        return math.log(1.0 + (self.doc_count - n + 0.5) / (n + 0.5))


def bm25_build(corpus: Iterable[Document], tokenizer: Tokenizer | str | None = DEFAULT_ANALYZER,
               k1: float = DEFAULT_K1, b: float = DEFAULT_B) -> Bm25Index:
    tok = get_tokenizer(tokenizer)
    postings: dict[str, list[tuple[str, int]]] = defaultdict(list)
    lengths: dict[str, int] = {}
    for doc in corpus:
        terms = tok.tokenize(f"{doc.title} {doc.text}" if doc.title else doc.text)
        lengths[doc.id] = len(terms)
        for term, tf in Counter(terms).items():
            postings[term].append((doc.id, tf))
    if not lengths:
        raise EmptyInputError("cannot index an empty corpus")
    avgdl = sum(lengths.values()) / len(lengths)
    return Bm25Index({t: tuple(p) for t, p in postings.items()}, lengths, avgdl, len(lengths),
                     k1, b, tok)


def bm25_search(index: Bm25Index, query: str, k: int = 100, query_id: str = "") -> RankedList:
    """Top-``k`` documents; every occurrence of a query term contributes."""
    tok = index.tokenizer or get_tokenizer(DEFAULT_ANALYZER)
    k1, b, avgdl = index.k1, index.b, index.avgdl
    scores: dict[str, float] = defaultdict(float)
    for term, qtf in Counter(tok.tokenize(query)).items():
        plist = index.postings.get(term)
        if not plist:
            continue
        w = index.idf(term) * qtf
        for doc_id, tf in plist:
            dl = index.doc_lengths[doc_id]
            norm = k1 * (1.0 - b + b * dl / avgdl) if avgdl > 0 else k1
            scores[doc_id] += w * tf / (tf + norm)
    return RankedList.from_scores(query_id, scores, k)


def bm25_run(index: Bm25Index, queries: Mapping[str, str] | Iterable, k: int = 100
             ) -> dict[str, RankedList]:
    items = queries.items() if isinstance(queries, Mapping) else ((q.id, q.text) for q in queries)
    return {qid: bm25_search(index, text, k, qid) for qid, text in items}
