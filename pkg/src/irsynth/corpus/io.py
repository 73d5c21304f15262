"""Reading and writing BEIR-style dataset files.

corpus.jsonl   {"_id", "title", "text"[, "metadata"]}
queries.jsonl  {"_id", "text"[, "metadata"]}
qrels.tsv      header ``query-id\tcorpus-id\tscore`` then one triple per line
split.tsv      ``query-id\tsplit``
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Iterable, Iterator

from ..errors import IntegrityError, ParseError
from ..records import Document, Origin, Qrel, Query, QueryAttributes, Split

QRELS_HEADER = "query-id\tcorpus-id\tscore"


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(", ", ": "))


def _jsonl(path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"invalid JSON ({e.msg})", lineno, path) from None
            if not isinstance(rec, dict):
                raise ParseError("record is not an object", lineno, path)
            yield lineno, rec


def _write_lines(path, lines: Iterable[str]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")
    os.replace(tmp, path)


# -- corpus -----------------------------------------------------------------

def document_to_record(doc: Document) -> dict:
    rec = {"_id": doc.id, "title": doc.title, "text": doc.text}
    if doc.origin is not Origin.SEED_CORPUS or doc.source_meta:
        rec["metadata"] = {"origin": doc.origin.value, **dict(doc.source_meta)}
    return rec


def document_from_record(rec: dict) -> Document:
    meta = dict(rec.get("metadata") or {})
    origin = Origin(meta.pop("origin", Origin.SEED_CORPUS.value))
    return Document(
        id=str(rec["_id"]),
        text=rec["text"],
        title=rec.get("title") or "",
        origin=origin,
        source_meta={str(k): str(v) for k, v in meta.items()},
    )


def read_corpus(path) -> Iterator[Document]:
    seen = set()
    for lineno, rec in _jsonl(path):
        try:
            doc = document_from_record(rec)
        except (KeyError, ValueError) as e:
            raise ParseError(f"bad corpus record: {e}", lineno, path) from None
        if doc.id in seen:
            raise IntegrityError(f"{path}:{lineno}: duplicate document id", [doc.id])
        seen.add(doc.id)
        yield doc


def write_corpus(docs: Iterable[Document], path) -> None:
    _write_lines(path, (_dumps(document_to_record(d)) for d in docs))


# -- queries ----------------------------------------------------------------

def query_to_record(q: Query, extra: dict | None = None) -> dict:
    rec: dict = {"_id": q.id, "text": q.text}
    meta: dict = {}
    if q.attributes is not None:
        meta["attributes"] = q.attributes.to_dict()
    if q.positive_doc_id or q.rewrite_history or q.character:
        meta["provenance"] = {
            "original_text": q.original_text,
            "character": q.character,
            "scenario": q.scenario,
            "positive_doc_id": q.positive_doc_id,
            "rewrite_history": list(q.rewrite_history),
        }
    if extra:
        meta.update(extra)
    if meta:
        rec["metadata"] = meta
    return rec


def query_from_record(rec: dict) -> Query:
    meta = rec.get("metadata") or {}
    prov = meta.get("provenance") or {}
    attrs = meta.get("attributes")
    return Query(
        id=str(rec["_id"]),
        text=rec["text"],
        original_text=prov.get("original_text", ""),
        attributes=QueryAttributes.from_dict(attrs) if attrs else None,
        character=prov.get("character", ""),
        scenario=prov.get("scenario", ""),
        positive_doc_id=prov.get("positive_doc_id", ""),
        rewrite_history=tuple(prov.get("rewrite_history", ())),
    )


def read_queries(path) -> Iterator[Query]:
    seen = set()
    for lineno, rec in _jsonl(path):
        try:
            q = query_from_record(rec)
        except (KeyError, ValueError) as e:
            raise ParseError(f"bad query record: {e}", lineno, path) from None
        if q.id in seen:
            raise IntegrityError(f"{path}:{lineno}: duplicate query id", [q.id])
        seen.add(q.id)
        yield q


def write_queries(queries: Iterable[Query], path) -> None:
    _write_lines(path, (_dumps(query_to_record(q)) for q in queries))


# -- qrels ------------------------------------------------------------------

def read_qrels(path) -> list[Qrel]:
    out: list[Qrel] = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            if lineno == 1 and line.startswith("query-id"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(f"expected 3 tab-separated fields, got {len(parts)}", lineno, path)
            qid, did, score = parts
            try:
                rel = int(score)
                qrel = Qrel(qid, did, rel)
            except ValueError:
                raise ParseError(f"score must be 0 or 1, got {score!r}", lineno, path) from None
            if (qid, did) in seen:
                raise IntegrityError(f"{path}:{lineno}: duplicate qrel", [f"{qid}/{did}"])
            seen.add((qid, did))
            out.append(qrel)
    return out


def write_qrels(qrels: Iterable[Qrel], path, sort: bool = True) -> None:
    rows = sorted(qrels) if sort else list(qrels)
    _write_lines(path, [QRELS_HEADER] + [f"{r.query_id}\t{r.doc_id}\t{r.relevance}" for r in rows])


# -- split ------------------------------------------------------------------

def write_split(split: dict[str, Split], path) -> None:
    _write_lines(path, ["query-id\tsplit"] + [f"{q}\t{split[q].value}" for q in sorted(split)])


def read_split(path) -> dict[str, Split]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line or (lineno == 1 and line.startswith("query-id")):
                continue
            try:
                qid, s = line.split("\t")
                out[qid] = Split(s)
            except ValueError:
                raise ParseError(f"bad split line {line!r}", lineno, path) from None
    return out
