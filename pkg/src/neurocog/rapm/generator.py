"""Matrix construction with per-cell retries and backtracking, distractors and item checks."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from typing import Any, Iterator

from .attributes import (
    AttributeSpec,
    IncompatibleAttributesError,
    UnsatisfiableError,
    propagate_constraints,
    sample_attribute_pair,
)
from .chartypes import ALPHABET, ATOM_NAMES, ATOMS, CHARSETS, chars_of, is_type, type_atoms
from .constraints import CellConstraints, cell_satisfies, positions
from .solver import candidate_lengths, feasible_vectors

logger = logging.getLogger(__name__)

CELL_RETRIES = 64
ITEM_BACKTRACKS = 16
ATTRIBUTE_RESAMPLES = 8
DISTRACTOR_ATTEMPTS = 512
N_OPTIONS = 8
MIN_HAMMING = 2


class CellGenerationError(RuntimeError):
    """Constructive search for a cell string gave up; the caller should backtrack."""


class SeedRejected(RuntimeError):
    """Generation budget for a seed was exhausted."""


def generalized_hamming(a: str, b: str) -> int:
    """Positional mismatches over the shorter string plus the length difference."""
    return sum(x != y for x, y in zip(a, b)) + abs(len(a) - len(b))


def _split(total: int, parts: list[int], caps: list[int], rng: random.Random) -> list[int]:
    """Random distinct-character counts per atom: each >=1, <= cap, summing to total."""
    out = [1] * len(parts)
    left = total - len(parts)
    while left > 0:
        open_ = [i for i in range(len(parts)) if out[i] < caps[i]]
        i = rng.choice(open_)
        out[i] += 1
        left -= 1
    return out


def _fill_atoms(vec: tuple[int, ...], unique: int | None, rng: random.Random) -> list[str]:
    """Characters for an atom-count vector, honouring an exact distinct count."""
    used = [i for i, v in enumerate(vec) if v]
    chars: list[str] = []
    if unique is None:
        for i in used:
            pool = ATOMS[ATOM_NAMES[i]]
            chars.extend(rng.choice(pool) for _ in range(vec[i]))
        return chars
    caps = [min(vec[i], len(ATOMS[ATOM_NAMES[i]])) for i in used]
    distinct = _split(unique, used, caps, rng)
    for i, d in zip(used, distinct):
        picked = rng.sample(ATOMS[ATOM_NAMES[i]], d)
        chars.extend(picked)
        chars.extend(rng.choice(picked) for _ in range(vec[i] - d))
    return chars


def _arrange(chars: list[str], c: CellConstraints, rng: random.Random) -> str | None:
    if c.ordering == "ascending":
        return "".join(sorted(chars))
    if c.ordering == "descending":
        return "".join(sorted(chars, reverse=True))
    if c.positional is not None:
        idx = list(positions(c.positional[0], len(chars)))
        good = [ch for ch in chars if is_type(ch, c.positional[1])]
        rng.shuffle(good)
        fixed = good[: len(idx)]
        rest = good[len(idx) :] + [ch for ch in chars if not is_type(ch, c.positional[1])]
        rng.shuffle(rest)
        out: list[str] = [""] * len(chars)
        for i, ch in zip(idx, fixed):
            out[i] = ch
        it = iter(rest)
        return "".join(ch or next(it) for ch in out)
    for _ in range(32):
        rng.shuffle(chars)
        s = "".join(chars)
        if c.ordering != "mixed" or cell_satisfies(s, CellConstraints(ordering="mixed")):
            return s
    return None


def generate_cell(constraints: CellConstraints, rng: random.Random) -> str:
    """A random string satisfying ``constraints``.

    Length is the fixed length when set, otherwise uniform over feasible
    lengths in [3, 12]; the atom composition is uniform over feasible vectors.
    """
    lengths = candidate_lengths(constraints)
    if not lengths:
        raise CellGenerationError(f"unsatisfiable constraints {constraints.to_dict()}")
    for _ in range(CELL_RETRIES):
        n = rng.choice(lengths)
        vec = rng.choice(feasible_vectors(constraints, n))
        s = _arrange(_fill_atoms(vec, constraints.unique_count, rng), constraints, rng)
        if s is not None and cell_satisfies(s, constraints):
            return s
    raise CellGenerationError(f"no string found for {constraints.to_dict()}")


@dataclass
class RapmItem:
    seed: int
    grid: list[list[str]]
    constraints: list[list[CellConstraints]]
    row_spec: AttributeSpec
    col_spec: AttributeSpec
    options: list[str] = field(default_factory=list)
    correct_index: int | None = None

    @property
    def answer(self) -> str:
        return self.grid[2][2]

    @property
    def target(self) -> CellConstraints:
        return self.constraints[2][2]

    def to_dict(self) -> dict[str, Any]:
        cells = [self.grid[i][j] for i in range(3) for j in range(3)]
        cells[8] = None
        return {
            "seed": self.seed,
            "grid": cells,
            "answer": self.answer,
            "constraints": [self.constraints[i][j].to_dict() for i in range(3) for j in range(3)],
            "options": list(self.options),
            "correct_index": self.correct_index,
            "row_attribute": self.row_spec.to_dict(),
            "col_attribute": self.col_spec.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RapmItem:
        cells = list(d["grid"])
        cells[8] = d["answer"] if "answer" in d else d["options"][d["correct_index"]]
        cons = [CellConstraints.from_dict(x) for x in d["constraints"]]
        return cls(
            seed=d["seed"],
            grid=[cells[0:3], cells[3:6], cells[6:9]],
            constraints=[cons[0:3], cons[3:6], cons[6:9]],
            row_spec=AttributeSpec.from_dict(d["row_attribute"]),
            col_spec=AttributeSpec.from_dict(d["col_attribute"]),
            options=list(d["options"]),
            correct_index=d["correct_index"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _fill_grid(cons: list[list[CellConstraints]], rng: random.Random) -> list[list[str]] | None:
    grid: list[list[str | None]] = [[None] * 3 for _ in range(3)]
    pos = 0
    backtracks = 0
    while pos < 9:
        i, j = divmod(pos, 3)
        placed = False
        for _ in range(CELL_RETRIES):
            try:
                s = generate_cell(cons[i][j], rng)
            except CellGenerationError:
                break
            row_ok = all(generalized_hamming(s, grid[i][k]) >= MIN_HAMMING for k in range(j))
            col_ok = all(generalized_hamming(s, grid[k][j]) >= MIN_HAMMING for k in range(i))
            if row_ok and col_ok:
                grid[i][j] = s
                placed = True
                break
        if placed:
            pos += 1
            continue
        backtracks += 1
        if backtracks > ITEM_BACKTRACKS:
            return None
        # drop a random number of earlier cells and rebuild from there
        step = rng.randint(1, min(pos, 2)) if pos else 0
        for back in range(pos - step, pos):
            grid[back // 3][back % 3] = None
        pos -= step
    return grid  # type: ignore[return-value]


def generate_matrix(seed: int) -> tuple[RapmItem, random.Random]:
    """Build the 3x3 matrix for ``seed``; returns the item and its rng for option work."""
    rng = random.Random(seed)
    for attempt in range(ATTRIBUTE_RESAMPLES):
        try:
            row, col = sample_attribute_pair(rng)
            cons = propagate_constraints(row, col)
        except (IncompatibleAttributesError, UnsatisfiableError) as exc:
            logger.debug("seed %d attempt %d: %s", seed, attempt, exc)
            continue
        grid = _fill_grid(cons, rng)
        if grid is not None:
            return RapmItem(seed=seed, grid=grid, constraints=cons, row_spec=row, col_spec=col), rng
        logger.debug("seed %d attempt %d: backtrack budget exhausted", seed, attempt)
    raise SeedRejected(f"seed {seed}: generation budget exhausted")


# -- distractors -------------------------------------------------------------


def _other_char(ch: str, pool: str, rng: random.Random) -> str | None:
    choices = [x for x in pool if x != ch]
    return rng.choice(choices) if choices else None


def _break_ordering(s: str, c: CellConstraints, rng: random.Random) -> str | None:
    if c.ordering is None or len(s) < 2:
        return None
    if c.ordering == "mixed":
        return "".join(sorted(s, reverse=rng.random() < 0.5))
    spots = [i for i in range(len(s) - 1) if s[i] != s[i + 1]]
    if not spots:
        return None
    i = rng.choice(spots)
    return s[:i] + s[i + 1] + s[i] + s[i + 2 :]


def _break_positional(s: str, c: CellConstraints, rng: random.Random) -> str | None:
    if c.positional is None:
        return None
    idx = list(positions(c.positional[0], len(s)))
    if not idx:
        return None
    forbidden = set(ATOM_NAMES) - type_atoms(c.positional[1])
    if c.charset is not None and forbidden & CHARSETS[c.charset]:
        forbidden &= CHARSETS[c.charset]
    i = rng.choice(idx)
    return s[:i] + rng.choice(chars_of(forbidden)) + s[i + 1 :]


def _adjust_count(s: str, c: CellConstraints, rng: random.Random) -> str | None:
    types = sorted(c.constrained_types())
    t = rng.choice(types) if types and rng.random() < 0.8 else None
    pool = chars_of(type_atoms(t)) if t else (chars_of(CHARSETS[c.charset]) if c.charset else ALPHABET)
    if rng.random() < 0.5:
        i = rng.randint(0, len(s))
        return s[:i] + rng.choice(pool) + s[i:]
    spots = [i for i, ch in enumerate(s) if (is_type(ch, t) if t else True)]
    if not spots or len(s) < 2:
        return None
    i = rng.choice(spots)
    return s[:i] + s[i + 1 :]


def _mutate(s: str, c: CellConstraints, rng: random.Random) -> str | None:
    if not s:
        return None
    out = list(s)
    for _ in range(rng.randint(1, 2)):
        i = rng.randrange(len(out))
        ch = _other_char(out[i], ALPHABET, rng)
        if ch is not None:
            out[i] = ch
    return "".join(out)


STRATEGIES = {
    "break-ordering": _break_ordering,
    "break-positional": _break_positional,
    "adjust-count": _adjust_count,
    "mutate": _mutate,
}


def generate_distractors(item: RapmItem, rng: random.Random) -> list[str]:
    """Seven distinct strings violating the hidden cell's constraints."""
    target = item.target
    answer = item.answer
    out: list[str] = []
    names = list(STRATEGIES)
    for _ in range(DISTRACTOR_ATTEMPTS):
        if len(out) == N_OPTIONS - 1:
            return out
        name = rng.choice(names)
        cand = STRATEGIES[name](answer, target, rng)
        if not cand or cand == answer or cand in out or cell_satisfies(cand, target):
            continue
        out.append(cand)
    if len(out) == N_OPTIONS - 1:
        return out
    raise SeedRejected(f"seed {item.seed}: only {len(out)} distractors")


def attach_options(item: RapmItem, rng: random.Random) -> RapmItem:
    options = generate_distractors(item, rng) + [item.answer]
    rng.shuffle(options)
    item.options = options
    item.correct_index = options.index(item.answer)
    return item


def generate_item(seed: int) -> RapmItem:
    item, rng = generate_matrix(seed)
    return attach_options(item, rng)


def generate_items(count: int, seed_base: int) -> Iterator[RapmItem]:
    """``count`` items from consecutive seeds; rejected seeds are logged and skipped."""
    seed = seed_base
    made = 0
    while made < count:
        try:
            item = generate_item(seed)
        except SeedRejected as exc:
            logger.info("rejected: %s", exc)
        else:
            made += 1
            yield item
        seed += 1


# -- validation --------------------------------------------------------------


@dataclass
class ValidationReport:
    seed: int
    cells_ok: bool
    options_ok: bool
    hamming_ok: bool
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.cells_ok and self.options_ok and self.hamming_ok


def validate_item(item: RapmItem) -> ValidationReport:
    problems: list[str] = []
    cells_ok = True
    for i in range(3):
        for j in range(3):
            s = item.grid[i][j]
            if not s or not cell_satisfies(s, item.constraints[i][j]):
                cells_ok = False
                problems.append(f"cell ({i + 1},{j + 1}) {s!r} violates its constraints")
    valid = [k for k, o in enumerate(item.options) if cell_satisfies(o, item.target)]
    options_ok = (
        len(item.options) == N_OPTIONS
        and len(set(item.options)) == N_OPTIONS
        and valid == [item.correct_index]
        and item.options[item.correct_index] == item.answer
    )
    if not options_ok:
        problems.append(f"options satisfying target: {valid}, correct_index {item.correct_index}")
    hamming_ok = True
    for k in range(3):
        for line in ([item.grid[k][j] for j in range(3)], [item.grid[i][k] for i in range(3)]):
            for a in range(3):
                for b in range(a + 1, 3):
                    if generalized_hamming(line[a] or "", line[b] or "") < MIN_HAMMING:
                        hamming_ok = False
                        problems.append(f"hamming({line[a]!r}, {line[b]!r}) < {MIN_HAMMING}")
    return ValidationReport(item.seed, cells_ok, options_ok, hamming_ok, problems)


def write_items(items: list[RapmItem], path) -> None:
    with open(path, "w") as fh:
        for item in items:
            fh.write(item.to_json() + "\n")


def read_items(path) -> list[RapmItem]:
    with open(path) as fh:
        return [RapmItem.from_dict(json.loads(line)) for line in fh if line.strip()]
