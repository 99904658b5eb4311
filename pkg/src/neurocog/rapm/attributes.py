"""Row/column attribute specs, compatibility table and constraint propagation."""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass
from typing import Any

from .chartypes import CHAR_TYPES, CHARSETS, type_atoms
from .constraints import INDEX_CLASSES, ORDERINGS, CellConstraints
from .solver import is_satisfiable

KINDS = (
    "charset",
    "type-count",
    "quant-constant",
    "quant-progression",
    "sorted-order",
    "positional",
)
METRICS = ("length", "unique-count", "type-count")
COUNT_RULES = ("even", "odd", "multiple")

MAX_COMPAT_DRAWS = 256

_TYPE_NAMES = tuple(CHAR_TYPES)


class UnsatisfiableError(ValueError):
    """Row and column rules cannot be merged into a satisfiable cell."""


class IncompatibleAttributesError(RuntimeError):
    """No compatible attribute pair was drawn within the resample budget."""


@dataclass(frozen=True)
class AttributeSpec:
    kind: str
    value: str | None = None  # charset name or ordering
    char_type: str | None = None
    rule: str | None = None  # even / odd / multiple
    n: int | None = None  # multiple-of N, or constant value
    metric: str | None = None
    start: int | None = None
    step: int | None = None
    index_class: str | None = None

    def __post_init__(self) -> None:
        k = self.kind
        populated = {f for f, v in asdict(self).items() if v is not None and f != "kind"}
        if k == "charset":
            expected = {"value"}
            ok = self.value in CHARSETS
        elif k == "type-count":
            expected = {"char_type", "rule"} | ({"n"} if self.rule == "multiple" else set())
            ok = (
                self.char_type in CHAR_TYPES
                and self.rule in COUNT_RULES
                and (self.rule != "multiple" or self.n in (2, 3, 4))
            )
        elif k == "quant-constant":
            expected = {"metric", "n"} | self._metric_fields()
            ok = self._metric_ok() and self.n is not None and 2 <= self.n <= 5
        elif k == "quant-progression":
            expected = {"metric", "start", "step"} | self._metric_fields()
            ok = (
                self._metric_ok()
                and self.start is not None
                and 1 <= self.start <= 3
                and self.step is not None
                and 1 <= self.step <= 3
            )
        elif k == "sorted-order":
            expected = {"value"}
            ok = self.value in ORDERINGS
        elif k == "positional":
            expected = {"index_class", "char_type"}
            ok = self.index_class in INDEX_CLASSES and self.char_type in CHAR_TYPES
        else:
            raise ValueError(f"unknown attribute kind {k!r}")
        if not ok or populated != expected:
            raise ValueError(f"malformed attribute spec {self!r}")

    def _metric_fields(self) -> set[str]:
        return {"char_type"} if self.metric == "type-count" else set()

    def _metric_ok(self) -> bool:
        if self.metric not in METRICS:
            return False
        return self.metric != "type-count" or self.char_type in CHAR_TYPES

    @property
    def is_quant(self) -> bool:
        return self.kind in ("quant-constant", "quant-progression")

    @property
    def metric_key(self) -> tuple[str, str | None]:
        return (self.metric, self.char_type)  # type: ignore[return-value]

    def value_at(self, k: int) -> int:
        """Metric value at line index k (0..2)."""
        if self.kind == "quant-constant":
            return self.n  # type: ignore[return-value]
        return self.start + k * self.step  # type: ignore[operator]

    def to_dict(self) -> dict[str, Any]:
        return {f: v for f, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> AttributeSpec:
        return cls(**d)

    def describe(self) -> str:
        d = self.to_dict()
        kind = d.pop("kind")
        return kind + "(" + ", ".join(f"{k}={v}" for k, v in d.items()) + ")"


def sample_attribute(rng: random.Random) -> AttributeSpec:
    kind = rng.choice(KINDS)
    if kind == "charset":
        return AttributeSpec(kind, value=rng.choice(tuple(CHARSETS)))
    if kind == "type-count":
        rule = rng.choice(COUNT_RULES)
        n = rng.choice((2, 3, 4)) if rule == "multiple" else None
        return AttributeSpec(kind, char_type=rng.choice(_TYPE_NAMES), rule=rule, n=n)
    if kind in ("quant-constant", "quant-progression"):
        metric = rng.choice(METRICS)
        char_type = rng.choice(_TYPE_NAMES) if metric == "type-count" else None
        if kind == "quant-constant":
            return AttributeSpec(kind, metric=metric, char_type=char_type, n=rng.randint(2, 5))
        return AttributeSpec(
            kind, metric=metric, char_type=char_type, start=rng.randint(1, 3), step=rng.randint(1, 3)
        )
    if kind == "sorted-order":
        return AttributeSpec(kind, value=rng.choice(ORDERINGS))
    return AttributeSpec(kind, index_class=rng.choice(INDEX_CLASSES), char_type=rng.choice(_TYPE_NAMES))


def sample_attribute_pair(
    rng: random.Random, max_draws: int = MAX_COMPAT_DRAWS
) -> tuple[AttributeSpec, AttributeSpec]:
    for _ in range(max_draws):
        row, col = sample_attribute(rng), sample_attribute(rng)
        if check_compatibility(row, col):
            return row, col
    raise IncompatibleAttributesError(f"no compatible attribute pair in {max_draws} draws")


def _required_type(spec: AttributeSpec) -> str | None:
    """Character type the attribute forces to a nonzero count, if any."""
    if spec.kind in ("type-count", "positional"):
        return spec.char_type
    if spec.is_quant and spec.metric == "type-count":
        return spec.char_type
    return None


def _constrained_count_type(spec: AttributeSpec) -> str | None:
    if spec.kind == "type-count":
        return spec.char_type
    if spec.is_quant and spec.metric == "type-count":
        return spec.char_type
    return None


def check_compatibility(row: AttributeSpec, col: AttributeSpec) -> bool:
    if row == col:
        return _all_cells_satisfiable(row, col)
    kinds = {row.kind, col.kind}
    # (a) sorting rearranges characters and can break fixed positions
    if kinds == {"sorted-order", "positional"}:
        return False
    # (b) same metric fixed to conflicting values
    if row.kind == col.kind and row.kind in ("charset", "sorted-order", "positional"):
        return False
    if row.is_quant and col.is_quant and row.metric_key == col.metric_key:
        return False
    t_row, t_col = _constrained_count_type(row), _constrained_count_type(col)
    if t_row is not None and t_row == t_col:
        return False
    # (c) charset leaves no room for a required nonzero type count
    for cs, other in ((row, col), (col, row)):
        if cs.kind == "charset":
            req = _required_type(other)
            if req is not None and not (type_atoms(req) & CHARSETS[cs.value]):
                return False
    # (d) and the remaining joint-satisfiability cases
    return _all_cells_satisfiable(row, col)


def _all_cells_satisfiable(row: AttributeSpec, col: AttributeSpec) -> bool:
    try:
        grid = propagate_constraints(row, col)
    except UnsatisfiableError:
        return False
    # two same-line cells pinned to length 1 can never differ in two positions
    for k in range(3):
        line_r = [grid[k][j].fixed_length for j in range(3)]
        line_c = [grid[i][k].fixed_length for i in range(3)]
        if line_r.count(1) > 1 or line_c.count(1) > 1:
            return False
    return True


def _apply(c: CellConstraints, spec: AttributeSpec, k: int) -> None:
    """Merge attribute ``spec`` instantiated at line index ``k`` into ``c``."""

    def conflict() -> UnsatisfiableError:
        return UnsatisfiableError(f"{spec.describe()} conflicts with {c.to_dict()}")

    if spec.kind == "charset":
        if c.charset not in (None, spec.value):
            raise conflict()
        c.charset = spec.value
    elif spec.kind == "type-count":
        t = spec.char_type
        if t in c.target_counts:
            raise conflict()
        if spec.rule == "multiple":
            if c.parity_rules.get(t) or c.multiple_rules.get(t, spec.n) != spec.n:
                raise conflict()
            c.multiple_rules[t] = spec.n
        else:
            if t in c.multiple_rules or c.parity_rules.get(t, spec.rule) != spec.rule:
                raise conflict()
            c.parity_rules[t] = spec.rule
    elif spec.is_quant:
        v = spec.value_at(k)
        if spec.metric == "length":
            if c.fixed_length not in (None, v):
                raise conflict()
            c.fixed_length = v
        elif spec.metric == "unique-count":
            if c.unique_count not in (None, v):
                raise conflict()
            c.unique_count = v
        else:
            t = spec.char_type
            if t in c.parity_rules or t in c.multiple_rules or c.target_counts.get(t, v) != v:
                raise conflict()
            c.target_counts[t] = v
    elif spec.kind == "sorted-order":
        if c.ordering not in (None, spec.value):
            raise conflict()
        c.ordering = spec.value
    else:
        pos = (spec.index_class, spec.char_type)
        if c.positional not in (None, pos):
            raise conflict()
        c.positional = pos


def infer_leaks(c: CellConstraints) -> None:
    """Add properties implied by the conjunction of the merged rules.

    Implication table:
      * single-type charset (digits/symbols) + fixed length L => that type counts L
      * exact count of a type equal to the fixed length => charset containing the type
    """
    single = {"digits": "digit", "symbols": "symbol"}
    if c.fixed_length is not None and c.charset in single:
        t = single[c.charset]
        if t not in c.constrained_types():
            c.target_counts[t] = c.fixed_length
    if c.fixed_length is not None and c.charset is None:
        for t, n in c.target_counts.items():
            if n != c.fixed_length:
                continue
            hosts = [name for name, atoms in CHARSETS.items() if type_atoms(t) <= atoms]
            if len(hosts) == 1:
                c.charset = hosts[0]
                break


def propagate_constraints(row: AttributeSpec, col: AttributeSpec) -> list[list[CellConstraints]]:
    """Per-cell constraint records for a row/column attribute pair.

    Row attributes progress left to right (index = column), column attributes
    progress top to bottom (index = row).
    """
    grid: list[list[CellConstraints]] = []
    for i in range(3):
        line = []
        for j in range(3):
            c = CellConstraints()
            _apply(c, row, j)
            _apply(c, col, i)
            infer_leaks(c)
            if not is_satisfiable(c):
                raise UnsatisfiableError(f"cell ({i + 1},{j + 1}) unsatisfiable: {c.to_dict()}")
            line.append(c)
        grid.append(line)
    return grid
