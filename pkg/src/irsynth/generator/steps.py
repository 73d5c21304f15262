"""Single prompting steps of the candidate-generation loop."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..corpus.tokenizers import unicode_tokenizer
from ..errors import ConfigError, GenerationError, ReplyParseError
from ..prompts import TemplateSet, load_templates, parse_lines, parse_single
from ..records import (
    Document,
    InfoType,
    LengthBucket,
    Origin,
    QueryAttributes,
    QueryType,
    Style,
    Task,
)
from .config import GenerationConfig

log = logging.getLogger(__name__)

_overlap_tok = unicode_tokenizer(lowercase=True)

LENGTH_PHRASES = {
    LengthBucket.UNDER_5: "less than 5 words",
    LengthBucket.FROM_5_TO_9: "between 5 and 9 words",
    LengthBucket.FROM_10_TO_20: "between 10 and 20 words",
    LengthBucket.OVER_20: "at least 20 words",
}
TYPE_PHRASES = {
    QueryType.QUESTION: "a question",
    QueryType.PROBLEM: "a description of a problem the user needs to solve",
    QueryType.CLAIM: "a claim (a declarative statement) that the document can support or refute",
}
INFO_PHRASES = {
    InfoType.OVERALL: "based on the overall information in the document",
    InfoType.PARTIAL: "based on a specific detail of the document beyond its main topic",
}
STYLE_PHRASES = {s: s.value for s in Style}


def token_jaccard(a: str, b: str) -> float:
    """Jaccard overlap of the lowercased token sets of two texts."""
    sa, sb = set(_overlap_tok.tokenize(a)), set(_overlap_tok.tokenize(b))
    if not sa and not sb:
        return 0.0
    return len(sa & sb) / len(sa | sb)


def _ask(chat, prompt: str, temperature: float | None) -> str:
    # ProviderError propagates; callers treat it as a failed iteration.
    return chat.chat_complete(prompt, temperature=temperature)


def generate_characters(doc: Document, chat, templates: TemplateSet | None = None,
                        temperature: float | None = 0.8) -> list[str]:
    t = templates or load_templates()
    reply = _ask(chat, t.render("characters", doc=doc.text), temperature)
    return parse_lines(reply)


def generate_scenario(doc: Document, character: str, chat, templates: TemplateSet | None = None,
                      temperature: float | None = 0.8) -> str:
    t = templates or load_templates()
    reply = _ask(chat, t.render("scenario", doc=doc.text, character=character), temperature)
    return parse_single(reply)


def generate_query(doc: Document, character: str, scenario: str, attrs: QueryAttributes, chat,
                   templates: TemplateSet | None = None, task: Task = Task.QA,
                   temperature: float | None = 0.8) -> str:
    """Ask for the original query. Style is not part of this prompt; it is
    applied during rewriting."""
    if task is Task.LONG_DOC and attrs.query_type is QueryType.PROBLEM:
        raise ConfigError("long-doc queries must be questions or claims")
    t = templates or load_templates()
    prompt = t.render(
        "query",
        doc=doc.text,
        character=character,
        scenario=scenario,
        length=LENGTH_PHRASES[attrs.length_bucket],
        type=TYPE_PHRASES[attrs.query_type],
        info=INFO_PHRASES[attrs.info_type],
    )
    return parse_single(_ask(chat, prompt, temperature))


@dataclass(frozen=True)
class RewriteResult:
    final: str
    history: tuple[str, ...]
    overlap: float
    fell_back: bool = False


def rewrite_query(query: str, positive_doc: Document, style: Style, chat,
                  config: GenerationConfig | None = None,
                  templates: TemplateSet | None = None) -> RewriteResult:
    """Rewrite until token overlap with the positive drops below the threshold.

    Each round rewrites the latest candidate. Empty replies are skipped; if
    every round is empty the input query is kept and ``fell_back`` is set.
    """
    if not query.strip():
        raise GenerationError("cannot rewrite an empty query")
    cfg = config or GenerationConfig()
    t = templates or load_templates()
    threshold = cfg.rewrite_overlap_threshold
    history = [query]
    current = query
    overlap = token_jaccard(query, positive_doc.text)
    for _ in range(cfg.rewrite_max_iters):
        prompt = t.render("rewrite", query=current, style=STYLE_PHRASES[style], doc=positive_doc.text)
        try:
            cand = parse_single(_ask(chat, prompt, cfg.temperature))
        except ReplyParseError:
            continue
        history.append(cand)
        current = cand
        overlap = token_jaccard(cand, positive_doc.text)
        if threshold >= 1.0 or overlap < threshold:
            break
    if len(history) == 1:
        log.warning("all rewrites empty; keeping original query %r", query[:60])
        return RewriteResult(query, (query,), overlap, fell_back=True)
    return RewriteResult(history[-1], tuple(history), overlap)


@dataclass(frozen=True)
class HardNegativeBatch:
    documents: tuple[Document, ...]
    requested: int

    @property
    def shortfall(self) -> int:
        return self.requested - len(self.documents)

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)


def generate_hard_negatives(query: str, positive_doc: Document, chat,
                            config: GenerationConfig | None, rng: np.random.Generator,
                            query_id: str = "q", templates: TemplateSet | None = None
                            ) -> HardNegativeBatch:
    """Request ``m`` hard negatives, ``m`` uniform on the configured range.

    Replies that duplicate the positive or each other are dropped; a
    shortfall is reported on the batch rather than raised.
    """
    cfg = config or GenerationConfig()
    lo, hi = cfg.hard_negative_range
    if cfg.task is Task.LONG_DOC or hi == 0:
        return HardNegativeBatch((), 0)
    m = int(rng.integers(lo, hi + 1))
    if m == 0:
        return HardNegativeBatch((), 0)
    t = templates or load_templates()
    reply = _ask(chat, t.render("hard_negatives", query=query, doc=positive_doc.text, n=m),
                 cfg.temperature)
    try:
        lines = parse_lines(reply)
    except ReplyParseError:
        lines = []
    pos = positive_doc.text.strip()
    seen = set()
    docs = []
    for line in lines:
        if line == pos or line in seen:
            continue
        seen.add(line)
        j = len(docs)
        docs.append(Document(
            id=f"{query_id}-hn-{j}",
            text=line,
            origin=Origin.HARD_NEGATIVE,
            source_meta={"query_id": query_id, "positive_id": positive_doc.id, "index": str(j)},
        ))
        if len(docs) == m:
            break
    if len(docs) < m:
        log.warning("query %s: requested %d hard negatives, parsed %d", query_id, m, len(docs))
    return HardNegativeBatch(tuple(docs), m)
