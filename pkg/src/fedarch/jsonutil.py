"""Canonical JSON helpers.

Everything the package serializes goes through `canonical_dumps` so that
identical in-memory values always produce identical bytes: keys sorted,
compact separators, no NaN/Infinity. This is what makes "run twice,
compare bytes" checks meaningful.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .errors import ParseError


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False,
                      ensure_ascii=False)


def canonical_dump_path(obj: Any, path: str | Path) -> None:
    Path(path).write_text(canonical_dumps(obj) + "\n", encoding="utf-8")


def load_json_path(path: str | Path) -> Any:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {p}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p} is not valid JSON: {exc}") from exc
