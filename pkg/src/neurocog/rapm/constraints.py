"""Per-cell constraint records and the cell validator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .chartypes import CHAR_TYPES, CHARSETS, atom_of, count_type, is_type

ORDERINGS = ("ascending", "descending", "mixed")
INDEX_CLASSES = ("first", "last", "even", "odd")
PARITIES = ("even", "odd")


@dataclass
class CellConstraints:
    """Machine-checkable rule record for one matrix cell.

    ``charset`` restricts every character to letters, digits or symbols; it is
    kept separate from the count rules so the digits-only leak stays explicit.
    """

    fixed_length: int | None = None
    charset: str | None = None
    target_counts: dict[str, int] = field(default_factory=dict)
    parity_rules: dict[str, str] = field(default_factory=dict)
    multiple_rules: dict[str, int] = field(default_factory=dict)
    unique_count: int | None = None
    ordering: str | None = None
    positional: tuple[str, str] | None = None

    def __post_init__(self) -> None:
        if self.fixed_length is not None and self.fixed_length < 1:
            raise ValueError("fixed_length must be >= 1")
        if self.charset is not None and self.charset not in CHARSETS:
            raise ValueError(f"unknown charset {self.charset!r}")
        seen: set[str] = set()
        for rules in (self.target_counts, self.parity_rules, self.multiple_rules):
            for t in rules:
                if t not in CHAR_TYPES:
                    raise ValueError(f"unknown character type {t!r}")
                if t in seen:
                    raise ValueError(f"character type {t!r} constrained twice")
                seen.add(t)
        for rule in self.parity_rules.values():
            if rule not in PARITIES:
                raise ValueError(f"bad parity rule {rule!r}")
        if self.ordering is not None and self.ordering not in ORDERINGS:
            raise ValueError(f"bad ordering {self.ordering!r}")
        if self.positional is not None:
            idx, t = self.positional
            if idx not in INDEX_CLASSES or t not in CHAR_TYPES:
                raise ValueError(f"bad positional rule {self.positional!r}")
            self.positional = (idx, t)

    def constrained_types(self) -> set[str]:
        return set(self.target_counts) | set(self.parity_rules) | set(self.multiple_rules)

    def to_dict(self) -> dict[str, Any]:
        return {
            "fixed_length": self.fixed_length,
            "charset": self.charset,
            "target_counts": dict(sorted(self.target_counts.items())),
            "parity_rules": dict(sorted(self.parity_rules.items())),
            "multiple_rules": dict(sorted(self.multiple_rules.items())),
            "unique_count": self.unique_count,
            "ordering": self.ordering,
            "positional": list(self.positional) if self.positional else None,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> CellConstraints:
        pos = d.get("positional")
        return cls(
            fixed_length=d.get("fixed_length"),
            charset=d.get("charset"),
            target_counts=dict(d.get("target_counts") or {}),
            parity_rules=dict(d.get("parity_rules") or {}),
            multiple_rules=dict(d.get("multiple_rules") or {}),
            unique_count=d.get("unique_count"),
            ordering=d.get("ordering"),
            positional=tuple(pos) if pos else None,
        )


def positions(index_class: str, n: int) -> range:
    """Indices selected by a positional index class in a string of length n."""
    if index_class == "first":
        return range(0, min(n, 1))
    if index_class == "last":
        return range(n - 1, n) if n else range(0)
    if index_class == "even":
        return range(0, n, 2)
    if index_class == "odd":
        return range(1, n, 2)
    raise ValueError(f"unknown index class {index_class!r}")


def check_order(s: str, ordering: str) -> bool:
    asc = list(s) == sorted(s)
    desc = list(s) == sorted(s, reverse=True)
    if ordering == "ascending":
        return asc
    if ordering == "descending":
        return desc
    return not asc and not desc


def check_positional(s: str, positional: tuple[str, str]) -> bool:
    index_class, char_type = positional
    idx = positions(index_class, len(s))
    # a positional rule with no position to inspect is not satisfied
    return len(idx) > 0 and all(is_type(s[i], char_type) for i in idx)


def cell_satisfies(s: str, c: CellConstraints) -> bool:
    """True iff ``s`` passes every clause of ``c``.

    Clause order: length, charset, exact counts, parity (zero rejected),
    multiples (zero rejected), unique count, ordering, positional.
    """
    if c.fixed_length is not None and len(s) != c.fixed_length:
        return False
    if c.charset is not None:
        allowed = CHARSETS[c.charset]
        if any(atom_of(ch) not in allowed for ch in s):
            return False
    for t, n in c.target_counts.items():
        if count_type(s, t) != n:
            return False
    for t, rule in c.parity_rules.items():
        n = count_type(s, t)
        if n == 0:
            return False
        if (rule == "even") != (n % 2 == 0):
            return False
    for t, k in c.multiple_rules.items():
        n = count_type(s, t)
        if n == 0 or n % k:
            return False
    if c.unique_count is not None and len(set(s)) != c.unique_count:
        return False
    if c.ordering is not None and not check_order(s, c.ordering):
        return False
    if c.positional is not None and not check_positional(s, c.positional):
        return False
    return True
