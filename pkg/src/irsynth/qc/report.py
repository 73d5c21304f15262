from __future__ import annotations

import json
import threading
from pathlib import Path


class QCReport:
    """Audit log of quality-control decisions, one record per decision."""

    def __init__(self):
        self.records: list[dict] = []
        self._lock = threading.Lock()

    def add(self, query_id: str, action: str, doc_id: str | None = None,
            doc_class: str | None = None, llm_level: int | None = None,
            votes: list | None = None, reason: str | None = None) -> None:
        rec = {
            "query_id": query_id,
            "action": action,
            "doc_id": doc_id,
            "doc_class": doc_class,
            "llm_level": llm_level,
            "votes": votes,
        }
        if reason:
            rec["reason"] = reason
        with self._lock:
            self.records.append(rec)

    def actions(self, action: str) -> list[dict]:
        return [r for r in self.records if r["action"] == action]

    def write(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            for r in self.records:
                fh.write(json.dumps(r, ensure_ascii=False) + "\n")

    def __len__(self):
        return len(self.records)
