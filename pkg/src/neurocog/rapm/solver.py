"""Exact feasibility search over atom-count vectors for a cell constraint record."""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator

from .chartypes import ATOM_NAMES, ATOMS, CHARSETS, type_atoms
from .constraints import CellConstraints, positions

FREE_LENGTHS = range(3, 13)
FALLBACK_LENGTHS = range(1, 21)

_ATOM_SIZE = tuple(len(ATOMS[a]) for a in ATOM_NAMES)


def _key(c: CellConstraints) -> tuple:
    return (
        c.charset,
        tuple(sorted(c.target_counts.items())),
        tuple(sorted(c.parity_rules.items())),
        tuple(sorted(c.multiple_rules.items())),
        c.unique_count,
        c.ordering,
        c.positional,
    )


@lru_cache(maxsize=None)
def _mask(char_type: str) -> tuple[bool, ...]:
    atoms = type_atoms(char_type)
    return tuple(a in atoms for a in ATOM_NAMES)


def _vector_ok(vec: tuple[int, ...], key: tuple) -> bool:
    charset, targets, parities, multiples, unique, ordering, positional = key
    n = sum(vec)

    def cnt(t: str) -> int:
        return sum(v for v, m in zip(vec, _mask(t)) if m)

    for t, k in targets:
        if cnt(t) != k:
            return False
    for t, rule in parities:
        k = cnt(t)
        if k == 0 or (rule == "even") != (k % 2 == 0):
            return False
    for t, m in multiples:
        k = cnt(t)
        if k == 0 or k % m:
            return False
    lo = sum(1 for v in vec if v)
    hi = sum(min(v, size) for v, size in zip(vec, _ATOM_SIZE))
    if unique is not None and not lo <= unique <= hi:
        return False
    if ordering == "mixed":
        distinct_max = unique if unique is not None else hi
        if n < 3 or distinct_max < 2:
            return False
    if positional is not None:
        idx = positions(positional[0], n)
        if not idx or cnt(positional[1]) < len(idx):
            return False
    return True


def _iter_vectors(key: tuple, length: int) -> Iterator[tuple[int, ...]]:
    charset = key[0]
    allowed = tuple(a in CHARSETS[charset] if charset else True for a in ATOM_NAMES)

    def rec(i: int, left: int, acc: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if i == len(ATOM_NAMES) - 1:
            if left and not allowed[i]:
                return
            vec = (*acc, left)
            if _vector_ok(vec, key):
                yield vec
            return
        top = left if allowed[i] else 0
        for v in range(top + 1):
            yield from rec(i + 1, left - v, (*acc, v))

    return rec(0, length, ())


@lru_cache(maxsize=4096)
def _vectors(key: tuple, length: int) -> tuple[tuple[int, ...], ...]:
    return tuple(_iter_vectors(key, length))


@lru_cache(maxsize=16384)
def _has_vector(key: tuple, length: int) -> bool:
    return next(_iter_vectors(key, length), None) is not None


def feasible_vectors(c: CellConstraints, length: int) -> tuple[tuple[int, ...], ...]:
    """All atom-count vectors of the given total length compatible with ``c``.

    Order is ignored except for the length/distinctness needs of ``mixed``.
    """
    return _vectors(_key(c), length)


def candidate_lengths(c: CellConstraints) -> list[int]:
    """Lengths the generator may pick: the fixed length, else feasible ones in
    [3, 12], widening to [1, 20] only when none of those work."""
    key = _key(c)
    if c.fixed_length is not None:
        return [c.fixed_length] if _has_vector(key, c.fixed_length) else []
    lengths = [n for n in FREE_LENGTHS if _has_vector(key, n)]
    if not lengths:
        lengths = [n for n in FALLBACK_LENGTHS if _has_vector(key, n)]
    return lengths


def is_satisfiable(c: CellConstraints) -> bool:
    key = _key(c)
    if c.fixed_length is not None:
        return _has_vector(key, c.fixed_length)
    return any(_has_vector(key, n) for n in FREE_LENGTHS) or any(
        _has_vector(key, n) for n in FALLBACK_LENGTHS
    )
