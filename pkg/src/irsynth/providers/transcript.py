"""Record/replay of provider traffic keyed by request fingerprint.

A transcript file holds one JSON object per line::

    {"fingerprint": "<sha256>", "response": <reply>}
"""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path

import numpy as np

from ..errors import ParseError, ProviderError


def fingerprint(kind: str, payload) -> str:
    body = json.dumps({"kind": kind, "payload": payload}, sort_keys=True,
                      ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


class Transcript:
    def __init__(self, entries: dict[str, object] | None = None):
        self.entries: dict[str, object] = dict(entries or {})
        self._lock = threading.Lock()

    def add(self, fp: str, response) -> None:
        with self._lock:
            self.entries.setdefault(fp, response)

    def get(self, fp: str):
        try:
            return self.entries[fp]
        except KeyError:
            raise ProviderError(f"no recorded response for fingerprint {fp[:12]}") from None

    def __len__(self):
        return len(self.entries)

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            for fp in sorted(self.entries):
                fh.write(json.dumps({"fingerprint": fp, "response": self.entries[fp]},
                                    ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path) -> "Transcript":
        entries = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    entries[rec["fingerprint"]] = rec["response"]
                except (json.JSONDecodeError, KeyError, TypeError):
                    raise ParseError("bad transcript record", lineno, path) from None
        return cls(entries)


class RecordingProvider:
    """Forward calls to ``inner`` and record every response."""

    def __init__(self, inner, transcript: Transcript | None = None, name: str | None = None):
        self.inner = inner
        self.transcript = transcript if transcript is not None else Transcript()
        self.name = name or getattr(inner, "name", "recorded")

    def chat_complete(self, prompt, temperature=None, max_tokens=None):
        reply = self.inner.chat_complete(prompt, temperature=temperature, max_tokens=max_tokens)
        self.transcript.add(fingerprint("chat", {"prompt": prompt}), reply)
        return reply

    def embed(self, texts):
        vecs = np.asarray(self.inner.embed(texts), dtype=float)
        self.transcript.add(fingerprint("embed", {"texts": list(texts)}), vecs.tolist())
        return vecs

    def rerank_score(self, query, docs):
        scores = list(self.inner.rerank_score(query, docs))
        self.transcript.add(
            fingerprint("rerank", {"name": self.name, "query": query, "docs": list(docs)}), scores)
        return scores


class ReplayProvider:
    """Serve responses from a transcript; unknown requests raise ProviderError."""

    def __init__(self, transcript: Transcript, name: str = "replay"):
        self.transcript = transcript
        self.name = name

    def chat_complete(self, prompt, temperature=None, max_tokens=None):
        return self.transcript.get(fingerprint("chat", {"prompt": prompt}))

    def embed(self, texts):
        return np.asarray(self.transcript.get(fingerprint("embed", {"texts": list(texts)})), dtype=float)

    def rerank_score(self, query, docs):
        return list(self.transcript.get(
            fingerprint("rerank", {"name": self.name, "query": query, "docs": list(docs)})))
