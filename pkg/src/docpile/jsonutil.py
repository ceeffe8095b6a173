"""Shared JSON and file-writing helpers.

Artifact files (fact stores, reports, workspaces) must be byte-identical
across reruns with identical inputs, so every writer here is canonical:
fixed key order, fixed separators, UTF-8, trailing newline.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Iterator


def canonical_json(data: Any) -> str:
    """Serialize to a canonical, human-readable JSON document."""
    return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def ndjson_line(record: dict) -> str:
    """One newline-delimited JSON record; key order is the dict's order."""
    return json.dumps(record, ensure_ascii=False) + "\n"


def write_ndjson(path: str | Path, records: Iterable[dict]) -> None:
    atomic_write_text(path, "".join(ndjson_line(r) for r in records))


def read_ndjson(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (1-based line number, parsed record), skipping blank lines."""
    with Path(path).open("r", encoding="utf-8") as fp:
        for line_no, line in enumerate(fp, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                record = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: invalid JSON record: {exc}") from exc
            yield line_no, record


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write a file atomically: temp file in the same directory, then rename."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fp:
            fp.write(text)
        os.replace(tmp_name, target)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
