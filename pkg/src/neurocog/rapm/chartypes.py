"""Closed character alphabet and the character-type taxonomy used by RAPM text items.

Every character type is a union of six disjoint *atoms*; generation works on
atom counts and validation on plain membership tests.
"""

from __future__ import annotations

import string

LOWER_VOWELS = "aeiou"
UPPER_VOWELS = "AEIOU"
LOWER_CONSONANTS = "".join(c for c in string.ascii_lowercase if c not in LOWER_VOWELS)
UPPER_CONSONANTS = "".join(c for c in string.ascii_uppercase if c not in UPPER_VOWELS)
DIGITS = string.digits
SYMBOLS = "!@#$%&*?]"

ALPHABET = string.ascii_lowercase + string.ascii_uppercase + DIGITS + SYMBOLS

# atom name -> characters; atoms partition ALPHABET
ATOMS: dict[str, str] = {
    "lv": LOWER_VOWELS,
    "lc": LOWER_CONSONANTS,
    "uv": UPPER_VOWELS,
    "uc": UPPER_CONSONANTS,
    "d": DIGITS,
    "s": SYMBOLS,
}
ATOM_NAMES: tuple[str, ...] = tuple(ATOMS)

CHAR_TYPES: dict[str, frozenset[str]] = {
    "lowercase-letter": frozenset({"lv", "lc"}),
    "uppercase-letter": frozenset({"uv", "uc"}),
    "digit": frozenset({"d"}),
    "symbol": frozenset({"s"}),
    "lowercase-vowel": frozenset({"lv"}),
    "uppercase-vowel": frozenset({"uv"}),
    "lowercase-consonant": frozenset({"lc"}),
    "uppercase-consonant": frozenset({"uc"}),
    "vowel": frozenset({"lv", "uv"}),
    "consonant": frozenset({"lc", "uc"}),
    "uppercase": frozenset({"uv", "uc"}),
    "lowercase": frozenset({"lv", "lc"}),
}

CHARSETS: dict[str, frozenset[str]] = {
    "letters": frozenset({"lv", "lc", "uv", "uc"}),
    "digits": frozenset({"d"}),
    "symbols": frozenset({"s"}),
}

_ATOM_OF = {ch: name for name, chars in ATOMS.items() for ch in chars}


def atom_of(ch: str) -> str | None:
    """Atom name of a character, or None for characters outside the alphabet."""
    return _ATOM_OF.get(ch)


def type_atoms(char_type: str) -> frozenset[str]:
    try:
        return CHAR_TYPES[char_type]
    except KeyError:
        raise ValueError(f"unknown character type {char_type!r}") from None


def is_type(ch: str, char_type: str) -> bool:
    return _ATOM_OF.get(ch) in type_atoms(char_type)


def count_type(s: str, char_type: str) -> int:
    atoms = type_atoms(char_type)
    return sum(1 for ch in s if _ATOM_OF.get(ch) in atoms)


def chars_of(atoms: frozenset[str] | set[str]) -> str:
    return "".join(ATOMS[a] for a in ATOM_NAMES if a in atoms)
