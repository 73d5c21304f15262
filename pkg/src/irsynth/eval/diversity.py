"""Corpus similarity and query type/style labeling."""

from __future__ import annotations

import enum
import logging
import math
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..corpus.tokenizers import Tokenizer, get_tokenizer
from ..errors import EmptyInputError, IrsynthError
from ..prompts import TemplateSet, extract_block, load_templates
from ..records import Document, Query

log = logging.getLogger(__name__)


class Facet(str, enum.Enum):
    TYPE = "type"
    STYLE = "style"


TYPE_LABELS = ("how", "what", "when", "where", "which", "who", "why", "yes/no", "claim", "others")
STYLE_LABELS = ("formal", "informal", "professional", "casual", "complicated", "concise",
                "academic", "others")
LABELS = {Facet.TYPE: TYPE_LABELS, Facet.STYLE: STYLE_LABELS}
_TEMPLATE = {Facet.TYPE: "label_type", Facet.STYLE: "label_style"}
_YES_NO = re.compile(r"\byes\s*(?:/|-|or|_)?\s*no\b")
_WORD = re.compile(r"[a-z]+(?:/[a-z]+)?")


def token_frequencies(texts: Iterable[Document | str], tokenizer: Tokenizer | str | None = None
                      ) -> dict[str, float]:
    tok = get_tokenizer(tokenizer)
    counts: Counter = Counter()
    for t in texts:
        counts.update(tok.tokenize(t.text if isinstance(t, Document) else t))
    total = sum(counts.values())
    if total == 0:
        raise EmptyInputError("corpus has no tokens")
    return {w: c / total for w, c in counts.items()}


def weighted_jaccard(corpus_a: Iterable[Document | str], corpus_b: Iterable[Document | str],
                     tokenizer: Tokenizer | str | None = "unicode-lower") -> float:
    """Sum of min over sum of max of the two token relative-frequency vectors."""
    wa = token_frequencies(corpus_a, tokenizer)
    wb = token_frequencies(corpus_b, tokenizer)
    vocab = sorted(wa.keys() | wb.keys())
    num = math.fsum(min(wa.get(t, 0.0), wb.get(t, 0.0)) for t in vocab)
    den = math.fsum(max(wa.get(t, 0.0), wb.get(t, 0.0)) for t in vocab)
    return num / den


def similarity_matrix(corpora: dict[str, Sequence[Document | str]],
                      tokenizer: Tokenizer | str | None = "unicode-lower") -> dict[str, dict[str, float]]:
    names = list(corpora)
    out = {a: {} for a in names}
    for i, a in enumerate(names):
        out[a][a] = 1.0
        for b in names[i + 1:]:
            s = weighted_jaccard(corpora[a], corpora[b], tokenizer)
            out[a][b] = out[b][a] = s
    return out


def parse_label(reply: str, facet: Facet | str) -> str:
    """Map a free-text reply to one label of ``facet``; anything else is ``others``."""
    labels = LABELS[Facet(facet)]
    text = extract_block(reply or "").lower().strip()
    if not text:
        return "others"
    text = _YES_NO.sub("yes/no", text)
    words = _WORD.findall(text)
    if not words:
        return "others"
    if words[0] in labels:
        return words[0]
    # a short reply such as "type: what" or "The style is formal."
    if len(words) <= 6:
        hits = [w for w in words if w in labels]
        if len(set(hits)) == 1:
            return hits[0]
    return "others"


@dataclass
class DiversityLabels:
    facet: Facet
    labels: dict[str, str]
    flagged: list[str] = field(default_factory=list)

    def distribution(self) -> dict[str, float]:
        n = len(self.labels)
        counts = Counter(self.labels.values())
        return {lab: (counts.get(lab, 0) / n if n else 0.0) for lab in LABELS[self.facet]}


def label_query_diversity(queries: Iterable[Query], chat, facet: Facet | str = Facet.TYPE,
                          templates: TemplateSet | None = None, workers: int = 8,
                          temperature: float | None = 0.0) -> DiversityLabels:
    facet = Facet(facet)
    t = templates or load_templates()
    queries = list(queries)

    def one(q: Query):
        try:
            reply = chat.chat_complete(t.render(_TEMPLATE[facet], query=q.text), temperature=temperature)
        except IrsynthError as e:
            log.warning("labeling failed for %s: %s", q.id, e)
            return "others", True
        return parse_label(reply, facet), False

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            res = list(pool.map(one, queries))
    else:
        res = [one(q) for q in queries]
    return DiversityLabels(
        facet,
        {q.id: lab for q, (lab, _) in zip(queries, res)},
        [q.id for q, (_, bad) in zip(queries, res) if bad],
    )
