"""TREC run files: ``query_id Q0 doc_id rank score tag`` per line."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping

from ..errors import ParseError
from ..records import RankedList


def read_run(path) -> dict[str, RankedList]:
    per_query: dict[str, dict[str, float]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise ParseError(f"expected 6 fields, got {len(parts)}", lineno, path)
            qid, _, did, _, score, _ = parts
            try:
                s = float(score)
            except ValueError:
                raise ParseError(f"bad score {score!r}", lineno, path) from None
            scores = per_query.setdefault(qid, {})
            if did in scores:
                raise ParseError(f"duplicate doc {did!r} for query {qid!r}", lineno, path)
            scores[did] = s
    return {q: RankedList.from_scores(q, s) for q, s in per_query.items()}


def write_run(runs: Mapping[str, RankedList] | Iterable[RankedList], path, tag: str = "irsynth") -> None:
    if isinstance(runs, Mapping):
        runs = runs.values()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for run in sorted(runs, key=lambda r: r.query_id):
            for rank, (did, score) in enumerate(run.entries, 1):
                fh.write(f"{run.query_id} Q0 {did} {rank} {score!r} {tag}\n")
