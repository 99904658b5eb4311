"""Independent reference implementations used only by the tests.

Nothing here imports the package's validation code; membership tables and
clause logic are written out by hand for a four-character alphabet.
"""

from __future__ import annotations

import itertools
import random

MINI_ALPHABET = ("a", "E", "7", "!")

# hand-written membership of each mini-alphabet character in every type
MINI_TYPES = {
    "lowercase-letter": {"a"},
    "uppercase-letter": {"E"},
    "digit": {"7"},
    "symbol": {"!"},
    "lowercase-vowel": {"a"},
    "uppercase-vowel": {"E"},
    "lowercase-consonant": set(),
    "uppercase-consonant": set(),
    "vowel": {"a", "E"},
    "consonant": set(),
    "uppercase": {"E"},
    "lowercase": {"a"},
}
MINI_CHARSETS = {"letters": {"a", "E"}, "digits": {"7"}, "symbols": {"!"}}


def mini_strings(max_len: int = 4) -> list[str]:
    out = []
    for n in range(max_len + 1):
        out += ["".join(p) for p in itertools.product(MINI_ALPHABET, repeat=n)]
    return out


def _count(s: str, t: str) -> int:
    n = 0
    for ch in s:
        if ch in MINI_TYPES[t]:
            n += 1
    return n


def _nondecreasing(s: str) -> bool:
    for i in range(len(s) - 1):
        if ord(s[i]) > ord(s[i + 1]):
            return False
    return True


def _nonincreasing(s: str) -> bool:
    for i in range(len(s) - 1):
        if ord(s[i]) < ord(s[i + 1]):
            return False
    return True


def _indices(index_class: str, n: int) -> list[int]:
    table = {
        "first": [0] if n else [],
        "last": [n - 1] if n else [],
        "even": [i for i in range(n) if i % 2 == 0],
        "odd": [i for i in range(n) if i % 2 == 1],
    }
    return table[index_class]


def clause_check(s: str, rec: dict) -> bool:
    """Evaluate every clause of a constraint record independently; all must hold."""
    clauses = []
    if rec.get("fixed_length") is not None:
        clauses.append(len(s) == rec["fixed_length"])
    if rec.get("charset") is not None:
        clauses.append(set(s) <= MINI_CHARSETS[rec["charset"]])
    for t, n in (rec.get("target_counts") or {}).items():
        clauses.append(_count(s, t) == n)
    for t, rule in (rec.get("parity_rules") or {}).items():
        n = _count(s, t)
        clauses.append(n > 0 and n % 2 == (0 if rule == "even" else 1))
    for t, k in (rec.get("multiple_rules") or {}).items():
        n = _count(s, t)
        clauses.append(n > 0 and n % k == 0)
    if rec.get("unique_count") is not None:
        clauses.append(len(set(s)) == rec["unique_count"])
    ordering = rec.get("ordering")
    if ordering == "ascending":
        clauses.append(_nondecreasing(s))
    elif ordering == "descending":
        clauses.append(_nonincreasing(s))
    elif ordering == "mixed":
        clauses.append(not _nondecreasing(s) and not _nonincreasing(s))
    if rec.get("positional") is not None:
        idx_class, t = rec["positional"]
        idx = _indices(idx_class, len(s))
        clauses.append(bool(idx) and all(s[i] in MINI_TYPES[t] for i in idx))
    return all(clauses)


def random_record(rng: random.Random) -> dict:
    """A random, structurally valid constraint record with small parameters."""
    types = list(MINI_TYPES)
    rng.shuffle(types)
    pool = iter(types)
    rec: dict = {
        "fixed_length": rng.choice([None, None, 1, 2, 3, 4]),
        "charset": rng.choice([None, None, None, "letters", "digits", "symbols"]),
        "target_counts": {},
        "parity_rules": {},
        "multiple_rules": {},
        "unique_count": rng.choice([None, None, 1, 2, 3]),
        "ordering": rng.choice([None, None, "ascending", "descending", "mixed"]),
        "positional": None,
    }
    for _ in range(rng.randint(0, 2)):
        kind = rng.choice(["target_counts", "parity_rules", "multiple_rules"])
        t = next(pool)
        if kind == "target_counts":
            rec[kind][t] = rng.randint(0, 3)
        elif kind == "parity_rules":
            rec[kind][t] = rng.choice(["even", "odd"])
        else:
            rec[kind][t] = rng.choice([2, 3, 4])
    if rng.random() < 0.35:
        rec["positional"] = [rng.choice(["first", "last", "even", "odd"]), rng.choice(list(MINI_TYPES))]
    return rec


def brute_hamming(a: str, b: str) -> int:
    """Position-by-position walk over the longer string; missing positions count as mismatches."""
    d = 0
    for i in range(max(len(a), len(b))):
        ca = a[i] if i < len(a) else None
        cb = b[i] if i < len(b) else None
        if ca is None or cb is None or ca != cb:
            d += 1
    return d
