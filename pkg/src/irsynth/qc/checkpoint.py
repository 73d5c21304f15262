from __future__ import annotations

import json
import threading
from pathlib import Path


class Checkpoint:
    """Append-only key/value log used to resume long provider-bound stages.

    Without a path it is an in-memory dict.
    """

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self._data: dict[str, object] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        rec = json.loads(line)
                    except json.JSONDecodeError:
                        # a torn final line from an interrupted run
                        continue
                    self._data[rec["key"]] = rec["value"]

    def __contains__(self, key):
        return key in self._data

    def get(self, key, default=None):
        return self._data.get(key, default)

    def put(self, key: str, value) -> None:
        with self._lock:
            self._data[key] = value
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps({"key": key, "value": value}, ensure_ascii=False) + "\n")

    def __len__(self):
        return len(self._data)
