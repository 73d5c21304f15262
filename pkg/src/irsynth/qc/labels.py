"""False-label correction: embedding recall, reranker pre-labels, LLM labels."""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..errors import IntegrityError, IrsynthError, ProviderError
from ..prompts import TemplateSet, load_templates
from ..records import CandidateSets, Document, Qrel, Query, RankedList
from .checkpoint import Checkpoint
from .judge import RelevanceLevel, judge_relevance
from .report import QCReport

log = logging.getLogger(__name__)

HARD_NEGATIVE_THRESHOLD = 20
OTHER_THRESHOLD = 10
RECALL_DEPTH = 1000


# -- recall ------------------------------------------------------------------

class EmbeddingIndex:
    """Cosine-similarity index over a fixed document set; immutable once built."""

    def __init__(self, docs: Iterable[Document], embedder, batch_size: int = 256):
        docs = list(docs)
        self.doc_ids = [d.id for d in docs]
        if len(set(self.doc_ids)) != len(self.doc_ids):
            raise IntegrityError("duplicate ids in recall corpus")
        self.texts = {d.id: d.text for d in docs}
        parts = [np.asarray(embedder.embed([d.text for d in docs[i:i + batch_size]]), dtype=float)
                 for i in range(0, len(docs), batch_size)]
        mat = np.vstack(parts) if parts else np.zeros((0, 0))
        if mat.shape[0] != len(docs):
            raise ProviderError(f"embedder returned {mat.shape[0]} vectors for {len(docs)} texts")
        self.matrix = _normalize(mat)
        self.embedder = embedder
        # tie-break key: position of each id in sorted order
        order = np.argsort(np.array(self.doc_ids, dtype=object), kind="stable")
        self._id_rank = np.empty(len(docs), dtype=np.int64)
        self._id_rank[order] = np.arange(len(docs))

    def __len__(self):
        return len(self.doc_ids)

    def search(self, text: str, k: int = RECALL_DEPTH, query_id: str = "") -> RankedList:
        qv = _normalize(np.asarray(self.embedder.embed([text]), dtype=float))[0]
        if qv.shape[0] != self.matrix.shape[1]:
            raise ProviderError("query and corpus embedding dimensions differ")
        scores = self.matrix @ qv
        order = np.lexsort((self._id_rank, -scores))[:k]
        return RankedList(query_id, tuple((self.doc_ids[i], float(scores[i])) for i in order))


def _normalize(m: np.ndarray) -> np.ndarray:
    if m.size == 0:
        return m
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return m / norms


def recall_top_k(query: Query | str, corpus: Iterable[Document] | EmbeddingIndex, embedder=None,
                 k: int = RECALL_DEPTH) -> RankedList:
    """Top-``k`` documents by cosine similarity, ties broken by ascending id."""
    index = corpus if isinstance(corpus, EmbeddingIndex) else EmbeddingIndex(corpus, embedder)
    text = query.text if isinstance(query, Query) else query
    qid = query.id if isinstance(query, Query) else ""
    return index.search(text, k, qid)


# -- pre-labeling ------------------------------------------------------------

@dataclass(frozen=True)
class RerankerVote:
    reranker_id: str
    rank: int
    vote: bool


@dataclass(frozen=True)
class PreLabel:
    doc_id: str
    votes: tuple[RerankerVote, ...]
    pre_positive: bool


def prelabel(recall_list: RankedList, query: Query | str, rerankers: Sequence,
             texts: Mapping[str, str], hard_negative_ids: Iterable[str] = (),
             threshold_hard_negative: int = HARD_NEGATIVE_THRESHOLD,
             threshold_other: int = OTHER_THRESHOLD) -> list[PreLabel]:
    """Majority vote of rerankers' top-N cutoffs for every recalled document.

    Each reranker re-orders the recall list; it votes positive for a
    document ranked within the cutoff (20 for hard negatives, 10 otherwise).
    A document is pre-positive when more than half of the rerankers that
    answered vote positive. Failing rerankers abstain.
    """
    if not rerankers:
        raise ValueError("at least one reranker is required")
    ids = recall_list.doc_ids
    if not ids:
        raise ValueError("recall list is empty")
    qtext = query.text if isinstance(query, Query) else query
    hn = set(hard_negative_ids)
    doc_texts = [texts[d] for d in ids]
    ranks_by_model: list[tuple[str, dict[str, int]]] = []
    for i, rr in enumerate(rerankers):
        name = getattr(rr, "name", f"reranker-{i}")
        try:
            scores = list(rr.rerank_score(qtext, doc_texts))
        except IrsynthError as e:
            log.warning("reranker %s abstains: %s", name, e)
            continue
        if len(scores) != len(ids):
            log.warning("reranker %s returned %d scores for %d docs; abstaining",
                        name, len(scores), len(ids))
            continue
        # stable: equal scores keep recall order
        order = sorted(range(len(ids)), key=lambda j: -scores[j])
        ranks_by_model.append((name, {ids[j]: pos + 1 for pos, j in enumerate(order)}))
    if not ranks_by_model:
        raise ProviderError("every reranker failed")

    out = []
    for d in ids:
        cutoff = threshold_hard_negative if d in hn else threshold_other
        votes = tuple(RerankerVote(name, ranks[d], ranks[d] <= cutoff) for name, ranks in ranks_by_model)
        yes = sum(v.vote for v in votes)
        out.append(PreLabel(d, votes, yes * 2 > len(votes)))
    return out


# -- action matrix -----------------------------------------------------------

class DocClass(str, enum.Enum):
    TYPE1_ORIGINAL_POSITIVE = "original_positive"
    TYPE2_HARD_NEGATIVE = "hard_negative"
    TYPE3_UNLABELED = "unlabeled"


@dataclass(frozen=True)
class Action:
    query_id: str
    doc_id: str
    doc_class: DocClass
    llm_positive: bool
    action: str  # skip | drop_false_negative | add_positive | integrity_violation


def classify_document(query_id: str, doc_id: str, state: CandidateSets) -> DocClass:
    if Qrel(query_id, doc_id, 1) in state.pos_qrels:
        return DocClass.TYPE1_ORIGINAL_POSITIVE
    if Qrel(query_id, doc_id, 0) in state.neg_qrels:
        if doc_id not in state.hard_negatives:
            raise IntegrityError("negative label for a document outside the hard-negative set",
                                 [f"{query_id}/{doc_id}"])
        return DocClass.TYPE2_HARD_NEGATIVE
    return DocClass.TYPE3_UNLABELED


def apply_action_matrix(query: Query | str, doc: Document, doc_class: DocClass,
                        llm_positive: bool, state: CandidateSets) -> Action:
    """Apply the (document class x LLM label) rule to ``state`` in place.

    =====================  ==========================  ======
    class                  LLM positive                LLM negative
    =====================  ==========================  ======
    original positive      skip                        integrity violation (recorded)
    hard negative          drop from D-, drop 0-label  skip
    unlabeled              add to D+, add 1-label      skip
    =====================  ==========================  ======
    """
    qid = query.id if isinstance(query, Query) else query
    actual = classify_document(qid, doc.id, state)
    if actual is not DocClass(doc_class):
        raise IntegrityError(f"document class {DocClass(doc_class).value} does not match state "
                             f"({actual.value})", [f"{qid}/{doc.id}"])
    if actual is DocClass.TYPE1_ORIGINAL_POSITIVE:
        name = "skip" if llm_positive else "integrity_violation"
    elif actual is DocClass.TYPE2_HARD_NEGATIVE:
        if llm_positive:
            state.hard_negatives.pop(doc.id, None)
            state.neg_qrels.discard(Qrel(qid, doc.id, 0))
            name = "drop_false_negative"
        else:
            name = "skip"
    else:
        if llm_positive:
            state.positives[doc.id] = doc
            state.pos_qrels.add(Qrel(qid, doc.id, 1))
            name = "add_positive"
        else:
            name = "skip"
    return Action(qid, doc.id, actual, llm_positive, name)


# -- full correction pass ----------------------------------------------------

@dataclass
class QueryCorrection:
    query_id: str
    recalled: list[str]
    prelabels: list[PreLabel]
    judgments: dict[str, int | None]
    error: str = ""

    def to_json(self) -> dict:
        return {
            "query_id": self.query_id,
            "recalled": self.recalled,
            "prelabels": [[p.doc_id, [[v.reranker_id, v.rank, v.vote] for v in p.votes],
                           p.pre_positive] for p in self.prelabels],
            "judgments": self.judgments,
            "error": self.error,
        }

    @classmethod
    def from_json(cls, d: dict) -> "QueryCorrection":
        pls = [PreLabel(doc, tuple(RerankerVote(n, r, v) for n, r, v in votes), pp)
               for doc, votes, pp in d["prelabels"]]
        return cls(d["query_id"], d["recalled"], pls, d["judgments"], d.get("error", ""))


def search_corpus(seed_corpus: Iterable[Document], cands: CandidateSets) -> list[Document]:
    """D0 plus generated positives and hard negatives, de-duplicated, sorted by id."""
    docs: dict[str, Document] = {}
    for d in list(seed_corpus) + list(cands.positives.values()) + list(cands.hard_negatives.values()):
        prev = docs.setdefault(d.id, d)
        if prev.text != d.text:
            raise IntegrityError("two different documents share an id", [d.id])
    return [docs[k] for k in sorted(docs)]


def correct_labels(cands: CandidateSets, seed_corpus: Iterable[Document], embedder,
                   rerankers: Sequence, chat, k: int = RECALL_DEPTH,
                   threshold_hard_negative: int = HARD_NEGATIVE_THRESHOLD,
                   threshold_other: int = OTHER_THRESHOLD,
                   templates: TemplateSet | None = None, workers: int = 8,
                   report: QCReport | None = None, checkpoint: Checkpoint | None = None,
                   temperature: float | None = 0.0) -> CandidateSets:
    """Recall, pre-label and LLM-label every query; apply the action matrix.

    Provider work per query runs in parallel and only reads the input sets;
    the resulting actions are applied one query at a time in query order.
    A query whose recall or reranking fails twice is dropped.
    """
    t = templates or load_templates()
    ck = checkpoint if checkpoint is not None else Checkpoint()
    docs = search_corpus(seed_corpus, cands)
    by_id = {d.id: d for d in docs}
    texts = {d.id: d.text for d in docs}
    hn_ids = set(cands.hard_negatives)
    index = EmbeddingIndex(docs, embedder)

    def work(q: Query) -> QueryCorrection:
        key = f"correct/{q.id}"
        if key in ck:
            return QueryCorrection.from_json(ck.get(key))
        try:
            recalled = index.search(q.text, k, q.id)
            pls = prelabel(recalled, q, rerankers, texts, hn_ids,
                           threshold_hard_negative, threshold_other)
        except IrsynthError as e:
            return QueryCorrection(q.id, [], [], {}, f"{type(e).__name__}: {e}")
        judgments: dict[str, int | None] = {}
        for p in pls:
            if not p.pre_positive:
                continue
            try:
                judgments[p.doc_id] = int(judge_relevance(q, by_id[p.doc_id], chat, t, temperature))
            except IrsynthError as e:
                log.warning("judging %s/%s failed, treated as negative: %s", q.id, p.doc_id, e)
                judgments[p.doc_id] = None
        qc = QueryCorrection(q.id, recalled.doc_ids, pls, judgments)
        ck.put(key, qc.to_json())
        return qc

    queries = list(cands.queries)
    if workers <= 1:
        results = [work(q) for q in queries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, queries))
    # deferred retry for queries whose recall/prelabel failed
    results = [work(q) if r.error else r for q, r in zip(queries, results)]

    state = cands.copy()
    for q, res in zip(queries, results):
        if res.error:
            log.warning("dropping query %s: %s", q.id, res.error)
            if report is not None:
                report.add(q.id, "drop_query", reason=res.error)
            state.remove_query(q.id)
            continue
        for p in res.prelabels:
            if not p.pre_positive:
                continue
            level = res.judgments.get(p.doc_id)
            positive = level is not None and RelevanceLevel(level).positive
            cls = classify_document(q.id, p.doc_id, state)
            act = apply_action_matrix(q, by_id[p.doc_id], cls, positive, state)
            if report is not None:
                report.add(q.id, act.action, p.doc_id, cls.value, level,
                           [[v.reranker_id, v.rank, v.vote] for v in p.votes],
                           reason="judging_failed" if level is None else None)
    return state
