"""Core records passed between pipeline stages.

These are plain dataclasses so they can be compared structurally and
serialized deterministically.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ConfigError, IntegrityError


class Origin(str, enum.Enum):
    SEED_CORPUS = "seed"
    HARD_NEGATIVE = "hard_negative"
    LONG_DOC_CHUNK = "long_doc_chunk"


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    title: str = ""
    origin: Origin = Origin.SEED_CORPUS
    source_meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ConfigError("document id must be non-empty")
        if not self.text.strip():
            raise ConfigError(f"document {self.id!r} has empty text")
        if self.origin is Origin.LONG_DOC_CHUNK:
            missing = {"parent_id", "chunk_index"} - set(self.source_meta)
            if missing:
                raise ConfigError(
                    f"chunk {self.id!r} lacks source_meta keys {sorted(missing)}"
                )

    def __hash__(self):
        return hash((self.id, self.text, self.title, self.origin))


class Task(str, enum.Enum):
    QA = "qa"
    LONG_DOC = "long_doc"


class LengthBucket(str, enum.Enum):
    UNDER_5 = "under_5"
    FROM_5_TO_9 = "5_to_9"
    FROM_10_TO_20 = "10_to_20"
    OVER_20 = "over_20"


class QueryType(str, enum.Enum):
    QUESTION = "question"
    PROBLEM = "problem"
    CLAIM = "claim"


class InfoType(str, enum.Enum):
    OVERALL = "overall"
    PARTIAL = "partial"


class Style(str, enum.Enum):
    CONCISE = "concise"
    CASUAL = "casual"
    INFORMAL = "informal"
    FORMAL = "formal"
    PROFESSIONAL = "professional"
    COMPLICATED = "complicated"
    ACADEMIC = "academic"


SHORT_BUCKETS = frozenset({LengthBucket.UNDER_5, LengthBucket.FROM_5_TO_9})


@dataclass(frozen=True)
class QueryAttributes:
    length_bucket: LengthBucket
    query_type: QueryType
    info_type: InfoType
    style: Style

    def __post_init__(self):
        if self.query_type is QueryType.CLAIM and self.length_bucket in SHORT_BUCKETS:
            raise ConfigError(
                f"claim queries cannot use length bucket {self.length_bucket.value}"
            )

    def to_dict(self) -> dict:
        return {
            "length": self.length_bucket.value,
            "type": self.query_type.value,
            "info": self.info_type.value,
            "style": self.style.value,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "QueryAttributes":
        return cls(
            LengthBucket(d["length"]),
            QueryType(d["type"]),
            InfoType(d["info"]),
            Style(d["style"]),
        )


@dataclass(frozen=True)
class Query:
    """A query plus its generation provenance.

    Queries read from foreign datasets only carry ``id`` and ``text``.
    """

    id: str
    text: str
    original_text: str = ""
    attributes: QueryAttributes | None = None
    character: str = ""
    scenario: str = ""
    positive_doc_id: str = ""
    rewrite_history: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.text.strip():
            raise ConfigError(f"query {self.id!r} has empty text")
        if self.rewrite_history:
            if self.rewrite_history[0] != self.original_text:
                raise ConfigError(f"query {self.id!r}: history must start with the original text")
            if self.rewrite_history[-1] != self.text:
                raise ConfigError(f"query {self.id!r}: history must end with the final text")


@dataclass(frozen=True, order=True)
class Qrel:
    query_id: str
    doc_id: str
    relevance: int

    def __post_init__(self):
        if self.relevance not in (0, 1):
            raise ConfigError(f"relevance must be 0 or 1, got {self.relevance!r}")


@dataclass(frozen=True)
class RankedList:
    """Ranked documents for one query, best first.

    Scores are non-increasing; equal scores are ordered by ascending doc id.
    """

    query_id: str
    entries: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        ids = [d for d, _ in self.entries]
        if len(set(ids)) != len(ids):
            raise IntegrityError(f"duplicate doc ids in ranked list for {self.query_id!r}")
        for (d0, s0), (d1, s1) in zip(self.entries, self.entries[1:]):
            if s1 > s0 or (s1 == s0 and d1 < d0):
                raise IntegrityError(
                    f"ranked list for {self.query_id!r} is not sorted at {d0!r}/{d1!r}"
                )

    @classmethod
    def from_scores(cls, query_id: str, scores: Mapping[str, float] | Iterable[tuple[str, float]],
                    k: int | None = None) -> "RankedList":
        pairs = scores.items() if isinstance(scores, Mapping) else scores
        ordered = sorted(((d, float(s)) for d, s in pairs), key=lambda p: (-p[1], p[0]))
        if k is not None:
            ordered = ordered[:k]
        return cls(query_id, tuple(ordered))

    @property
    def doc_ids(self) -> list[str]:
        return [d for d, _ in self.entries]

    def __len__(self):
        return len(self.entries)


@dataclass
class CandidateSets:
    """Mutable state of the generated candidate data.

    ``positives`` and ``hard_negatives`` map doc id to document; qrels are
    kept as sets and serialized in sorted order.
    """

    queries: list[Query] = field(default_factory=list)
    positives: dict[str, Document] = field(default_factory=dict)
    hard_negatives: dict[str, Document] = field(default_factory=dict)
    pos_qrels: set[Qrel] = field(default_factory=set)
    neg_qrels: set[Qrel] = field(default_factory=set)
    skipped: list[tuple[int, str]] = field(default_factory=list)

    def query_ids(self) -> list[str]:
        return [q.id for q in self.queries]

    def qrels_for(self, query_id: str) -> dict[str, int]:
        out = {r.doc_id: 1 for r in self.pos_qrels if r.query_id == query_id}
        out.update({r.doc_id: 0 for r in self.neg_qrels if r.query_id == query_id})
        return out

    def copy(self) -> "CandidateSets":
        return CandidateSets(
            list(self.queries),
            dict(self.positives),
            dict(self.hard_negatives),
            set(self.pos_qrels),
            set(self.neg_qrels),
            list(self.skipped),
        )

    def remove_query(self, query_id: str) -> None:
        """Drop a query with all of its labels and the hard negatives it owned."""
        self.queries = [q for q in self.queries if q.id != query_id]
        self.pos_qrels = {r for r in self.pos_qrels if r.query_id != query_id}
        self.neg_qrels = {r for r in self.neg_qrels if r.query_id != query_id}
        self.prune_orphans()

    def prune_orphans(self) -> None:
        neg_referenced = {r.doc_id for r in self.neg_qrels}
        pos_referenced = {r.doc_id for r in self.pos_qrels}
        self.hard_negatives = {
            k: v for k, v in self.hard_negatives.items() if k in neg_referenced
        }
        self.positives = {k: v for k, v in self.positives.items() if k in pos_referenced}


class Split(str, enum.Enum):
    DEV = "dev"
    TEST = "test"


@dataclass
class DatasetBundle:
    corpus: dict[str, Document]
    queries: list[Query]
    qrels: set[Qrel]
    split: dict[str, Split]

    def validate(self) -> None:
        """Raise IntegrityError listing every offender of the bundle invariants."""
        qids = [q.id for q in self.queries]
        if len(set(qids)) != len(qids):
            raise IntegrityError("duplicate query ids", sorted({q for q in qids if qids.count(q) > 1}))
        known = set(qids)
        bad_q = sorted({r.query_id for r in self.qrels if r.query_id not in known})
        if bad_q:
            raise IntegrityError("qrels reference unknown queries", bad_q)
        bad_d = sorted({r.doc_id for r in self.qrels if r.doc_id not in self.corpus})
        if bad_d:
            raise IntegrityError("qrels reference documents missing from corpus", bad_d)
        has_pos = {r.query_id for r in self.qrels if r.relevance == 1}
        no_pos = sorted(known - has_pos)
        if no_pos:
            raise IntegrityError("queries without a positive qrel", no_pos)
        if set(self.split) != known:
            extra = sorted(set(self.split) ^ known)
            raise IntegrityError("split does not cover exactly the retained queries", extra)

    def qrels_by_query(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for r in sorted(self.qrels):
            out.setdefault(r.query_id, {})[r.doc_id] = r.relevance
        return out
