"""Strict answer extraction: only the last well-formed <answer>...</answer> pair counts."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

_TAG = re.compile(r"<answer>((?:(?!<answer>).)*?)</answer>", re.DOTALL)
_INT = re.compile(r"\s*([+-]?\d+)\s*")
_COORD = re.compile(r"\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*")


@dataclass(frozen=True)
class ParseResult:
    valid: bool
    value: Any = None
    reason: str | None = None


INVALID_NO_TAG = ParseResult(False, reason="no answer tag")


def last_answer(raw: str | None) -> str | None:
    if not raw:
        return None
    found = _TAG.findall(raw)
    return found[-1] if found else None


def parse_answer(
    raw: str | None, kind: str, lo: int | None = None, hi: int | None = None
) -> ParseResult:
    """Parse ``raw`` as ``kind``: 'int' (optionally within lo..hi), 'coordinate' or 'string'."""
    content = last_answer(raw)
    if content is None:
        return INVALID_NO_TAG
    if kind == "int":
        m = _INT.fullmatch(content)
        if not m:
            return ParseResult(False, reason=f"not an integer: {content!r}")
        value = int(m.group(1))
        if (lo is not None and value < lo) or (hi is not None and value > hi):
            return ParseResult(False, reason=f"out of range: {value}")
        return ParseResult(True, value)
    if kind == "coordinate":
        m = _COORD.fullmatch(content)
        if not m:
            return ParseResult(False, reason=f"not a coordinate: {content!r}")
        return ParseResult(True, (int(m.group(1)), int(m.group(2))))
    if kind == "string":
        value = content.strip()
        if not value:
            return ParseResult(False, reason="empty string")
        return ParseResult(True, value)
    raise ValueError(f"unknown answer kind {kind!r}")
