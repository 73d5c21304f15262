"""Binary-relevance nDCG@k and Recall@k, plus run-level evaluation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ..records import DatasetBundle, RankedList, Split, Task

log = logging.getLogger(__name__)


def _positives(qrels: Mapping[str, int] | Iterable[str]) -> set[str]:
    if isinstance(qrels, Mapping):
        return {d for d, rel in qrels.items() if rel > 0}
    return set(qrels)


def _ids(run: RankedList | Sequence[str]) -> list[str]:
    return run.doc_ids if isinstance(run, RankedList) else list(run)


def ndcg_at_k(run: RankedList | Sequence[str], qrels, k: int = 10) -> float | None:
    """nDCG@k with gain 1 per relevant doc and discount ``1/log2(rank+1)``.

    Returns None when the query has no positives (it is excluded from means).
    """
    pos = _positives(qrels)
    if not pos:
        return None
    dcg = sum(1.0 / math.log2(i + 2) for i, d in enumerate(_ids(run)[:k]) if d in pos)
    idcg = sum(1.0 / math.log2(i + 2) for i in range(min(k, len(pos))))
    return dcg / idcg


def recall_at_k(run: RankedList | Sequence[str], qrels, k: int = 10) -> float | None:
    pos = _positives(qrels)
    if not pos:
        return None
    hits = len(pos.intersection(_ids(run)[:k]))
    return hits / len(pos)


@dataclass
class MetricReport:
    metric: str
    k: int
    per_query: dict[str, float]
    mean: float
    missing: list[str] = field(default_factory=list)
    excluded: list[str] = field(default_factory=list)
    unknown_docs: int = 0

    def rows(self):
        for q in sorted(self.per_query):
            yield q, self.metric, self.per_query[q]


TASK_METRIC = {Task.QA: "ndcg", Task.LONG_DOC: "recall"}


def evaluate_run(runs: Mapping[str, RankedList] | Iterable[RankedList], bundle: DatasetBundle,
                 task: Task = Task.QA, split: Split | str | None = None, k: int = 10,
                 metric: str | None = None) -> MetricReport:
    """Score a run against the bundle's qrels.

    Queries in the selected split without a ranked list score 0 and are
    listed in ``missing``; entries naming documents outside the corpus are
    dropped before scoring.
    """
    if not isinstance(runs, Mapping):
        runs = {r.query_id: r for r in runs}
    metric = metric or TASK_METRIC[Task(task)]
    fn = ndcg_at_k if metric == "ndcg" else recall_at_k
    qrels = bundle.qrels_by_query()
    if split is None:
        selected = sorted(q.id for q in bundle.queries)
    else:
        s = Split(split)
        selected = sorted(q for q, v in bundle.split.items() if v is s)

    per_query: dict[str, float] = {}
    missing, excluded = [], []
    unknown = 0
    for qid in selected:
        rels = qrels.get(qid, {})
        if not any(v > 0 for v in rels.values()):
            excluded.append(qid)
            continue
        run = runs.get(qid)
        if run is None:
            missing.append(qid)
            per_query[qid] = 0.0
            continue
        ids = [d for d in run.doc_ids if d in bundle.corpus]
        unknown += len(run) - len(ids)
        per_query[qid] = fn(ids, rels, k)
    if unknown:
        log.warning("%d run entries reference documents outside the corpus", unknown)
    if missing:
        log.warning("%d queries have no ranked list", len(missing))
    mean = math.fsum(per_query.values()) / len(per_query) if per_query else 0.0
    name = f"{'nDCG' if metric == 'ndcg' else 'Recall'}@{k}"
    return MetricReport(name, k, per_query, mean, missing, excluded, unknown)
