"""Deterministic report serialization and atomic file output."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .vectors import FiniteVector, Interval

SCHEMA_VERSION = 1


def _plain(obj: Any) -> Any:
    """Recursively replace rationals, enclosures and vectors by JSON-safe values."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, float):
        raise TypeError("floats are not allowed in reports; convert to Fraction first")
    if isinstance(obj, Interval):
        return obj.to_json()
    if isinstance(obj, FiniteVector):
        return obj.to_json()
    if hasattr(obj, "to_json"):
        return _plain(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render_report(command: str, payload: Any) -> str:
    """Canonical report text: sorted keys, two-space indent, trailing newline."""
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "result": _plain(payload)}
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def render_csv(rows: Sequence[Sequence[Any]], header: Sequence[str] | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header is not None:
        writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v: Any) -> str:
    if isinstance(v, Interval):
        return str(v.lo) if v.exact else f"[{v.lo};{v.hi}]"
    return str(v)


def write_atomic(path: str | os.PathLike, text: str) -> Path:
    """Write ``text`` to ``path`` through a temporary file in the same directory and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return path
