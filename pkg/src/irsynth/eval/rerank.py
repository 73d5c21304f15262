from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Mapping

from ..errors import IrsynthError
from ..records import RankedList

log = logging.getLogger(__name__)


def rerank_eval(first_stage: Mapping[str, RankedList], reranker, queries: Mapping[str, str],
                corpus: Mapping[str, str], depth: int = 100, k: int | None = None,
                workers: int = 1) -> tuple[dict[str, RankedList], list[str]]:
    """Re-score the top ``depth`` of each first-stage list with ``reranker``.

    Entries below ``depth`` are dropped; ``k`` optionally truncates the
    re-ranked list. A query whose reranker call fails keeps its first-stage
    order (cut to ``depth``) and is returned in the failure list.
    """
    def one(qid: str):
        run = first_stage[qid]
        head = run.entries[:depth]
        ids = [d for d, _ in head]
        try:
            scores = reranker.rerank_score(queries[qid], [corpus[d] for d in ids])
            if len(scores) != len(ids):
                raise IrsynthError(f"reranker returned {len(scores)} scores for {len(ids)} docs")
        except IrsynthError as e:
            log.warning("rerank failed for %s, keeping first-stage order: %s", qid, e)
            return RankedList(qid, tuple(head[:k] if k else head)), True
        return RankedList.from_scores(qid, zip(ids, scores), k), False

    qids = sorted(first_stage)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, qids))
    else:
        results = [one(q) for q in qids]
    out = {q: r for q, (r, _) in zip(qids, results)}
    failed = [q for q, (_, f) in zip(qids, results) if f]
    return out, failed
