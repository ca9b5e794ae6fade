"""Deterministic JSON-lines log writers and readers.

Keys are sorted and separators fixed so identical runs produce byte-identical
log files.
"""

from __future__ import annotations

import json
from pathlib import Path


def dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), allow_nan=False)


class JsonlWriter:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._fh = self.path.open("w")

    def write(self, record: dict) -> None:
        self._fh.write(dumps(record) + "\n")

    def close(self) -> None:
        self._fh.flush()
        self._fh.close()

    def __enter__(self) -> "JsonlWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_jsonl(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        return []
    out = []
    for line in path.read_text().splitlines():
        if line.strip():
            out.append(json.loads(line))
    return out
