"""LLM relevance judging and low-quality query filtering."""

from __future__ import annotations

import enum
import logging
import re
from concurrent.futures import ThreadPoolExecutor

from ..errors import IntegrityError, IrsynthError, JudgingError
from ..prompts import TemplateSet, load_templates
from ..records import CandidateSets, Document, Query
from .checkpoint import Checkpoint
from .report import QCReport

log = logging.getLogger(__name__)

_STRICT = re.compile(r"^\s*([0-3])\s*$")
_ANY_INT = re.compile(r"-?\d+")


class RelevanceLevel(enum.IntEnum):
    NOT_RELEVANT = 0
    SUPERFICIAL = 1
    SOMEWHAT = 2
    RELEVANT = 3

    @property
    def positive(self) -> bool:
        # level 1 reads "superficially relevant but actually not relevant"
        return self >= RelevanceLevel.SOMEWHAT


def _strict(reply: str) -> int | None:
    m = _STRICT.match(reply or "")
    return int(m.group(1)) if m else None


def _lenient(reply: str) -> int | None:
    m = _ANY_INT.search(reply or "")
    if m is None:
        return None
    v = int(m.group())
    return v if 0 <= v <= 3 else None


def judge_relevance(query: Query | str, doc: Document | str, chat,
                    templates: TemplateSet | None = None,
                    temperature: float | None = 0.0) -> RelevanceLevel:
    """Ask the judge for a 0-3 relevance level.

    A reply that is not a bare digit 0-3 triggers one re-ask; the second
    reply is accepted if a single digit can be pulled out of it.
    """
    t = templates or load_templates()
    qtext = query.text if isinstance(query, Query) else query
    dtext = doc.text if isinstance(doc, Document) else doc
    prompt = t.render("judge", query=qtext, doc=dtext)
    first = chat.chat_complete(prompt, temperature=temperature)
    level = _strict(first)
    if level is None:
        second = chat.chat_complete(prompt, temperature=temperature)
        level = _strict(second)
        if level is None:
            level = _lenient(second)
        if level is None:
            raise JudgingError(f"unusable judge replies {first!r} / {second!r}")
    return RelevanceLevel(level)


def filter_low_quality_queries(cands: CandidateSets, chat, templates: TemplateSet | None = None,
                               workers: int = 8, report: QCReport | None = None,
                               checkpoint: Checkpoint | None = None,
                               temperature: float | None = 0.0) -> CandidateSets:
    """Drop queries whose own positive is judged not relevant.

    A dropped query loses every label it has and the hard negatives only it
    referenced. A judging failure drops the query as well.
    """
    t = templates or load_templates()
    ck = checkpoint if checkpoint is not None else Checkpoint()
    missing = [q.id for q in cands.queries if q.positive_doc_id not in cands.positives]
    if missing:
        raise IntegrityError("queries whose positive is absent from the candidates", missing)

    def work(q: Query):
        key = f"filter/{q.id}"
        if key in ck:
            return ck.get(key)
        try:
            level = int(judge_relevance(q, cands.positives[q.positive_doc_id], chat, t, temperature))
        except IrsynthError as e:
            log.warning("judging failed for %s: %s", q.id, e)
            return {"level": None, "error": str(e)}
        out = {"level": level, "error": ""}
        ck.put(key, out)
        return out

    if workers <= 1:
        verdicts = [work(q) for q in cands.queries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            verdicts = list(pool.map(work, cands.queries))

    out = cands.copy()
    for q, v in zip(cands.queries, verdicts):
        level = v["level"]
        keep = level is not None and RelevanceLevel(level).positive
        if report is not None:
            report.add(q.id, "keep_query" if keep else "drop_query", q.positive_doc_id,
                       "original_positive", level, reason=v["error"] or None)
        if not keep:
            out.remove_query(q.id)
    return out
