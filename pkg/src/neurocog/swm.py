"""Spatial Working Memory trial: box search with token regeneration and error taxonomy."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Union

from . import svg

TOKEN_TYPES = ("A", "B")
TOKEN_COLORS = {"A": "red", "B": "blue"}
MIXED_COLOR = "purple"

_LEVELS = {
    # n_boxes, n_token_types, tokens_required, guess_cap
    "easy": (8, 1, 8, 64),
    "hard": (12, 2, 24, 144),
}
MODALITIES = ("text", "image", "image+text")

Guess = Union[int, tuple[int, int]]


@dataclass
class SwmConfig:
    difficulty: str = "easy"
    modality: str = "text"
    notes: bool = False
    seed: int = 0
    grid_width: int = 12
    grid_height: int = 8

    def __post_init__(self) -> None:
        if self.difficulty not in _LEVELS:
            raise ValueError(f"unknown difficulty {self.difficulty!r}")
        if self.modality not in MODALITIES:
            raise ValueError(f"unknown modality {self.modality!r}")
        if self.grid_width * self.grid_height < self.n_boxes:
            raise ValueError("grid too small for the box count")

    @property
    def n_boxes(self) -> int:
        return _LEVELS[self.difficulty][0]

    @property
    def n_token_types(self) -> int:
        return _LEVELS[self.difficulty][1]

    @property
    def tokens_required(self) -> int:
        return _LEVELS[self.difficulty][2]

    @property
    def guess_cap(self) -> int:
        return _LEVELS[self.difficulty][3]

    @property
    def uses_image(self) -> bool:
        return self.modality != "text"

    @property
    def token_types(self) -> tuple[str, ...]:
        return TOKEN_TYPES[: self.n_token_types]


@dataclass
class GuessOutcome:
    kind: str  # found / empty / illegal / no_box / repeated / invalid
    box: int | None = None  # internal 0-based box index
    found: tuple[str, ...] = ()

    @property
    def is_error(self) -> bool:
        return self.kind in ("illegal", "no_box", "repeated")


@dataclass
class GuessRecord:
    raw: str | None
    guess: Any
    outcome: str
    box: int | None
    found: tuple[str, ...]


@dataclass
class SwmTrial:
    config: SwmConfig
    rng: random.Random
    box_cells: list[Any]
    history: dict[str, list[int]]
    active: dict[str, int | None]
    opened_empty_since_change: set[int] = field(default_factory=set)
    found_count: dict[str, int] = field(default_factory=dict)
    guess_log: list[GuessRecord] = field(default_factory=list)
    turn_count: int = 0

    @property
    def n_boxes(self) -> int:
        return len(self.box_cells)

    @property
    def tokens_found(self) -> int:
        return sum(self.found_count.values())

    @property
    def done(self) -> bool:
        return (
            self.tokens_found >= self.config.tokens_required
            or self.turn_count >= self.config.guess_cap
        )

    def label(self, box: int) -> str:
        if self.config.uses_image:
            x, y = self.box_cells[box]
            return f"({x}, {y})"
        return str(box + 1)

    def box_index(self, guess: Guess) -> int | None:
        if self.config.uses_image:
            if isinstance(guess, tuple) and guess in self.box_cells:
                return self.box_cells.index(guess)
            return None
        if isinstance(guess, int) and 1 <= guess <= self.n_boxes:
            return guess - 1
        return None

    def yielded(self, t: str) -> list[int]:
        """Boxes where token ``t`` has already been found (history minus the live box)."""
        return [b for b in self.history[t] if b != self.active[t]]

    def digest_state(self) -> dict[str, Any]:
        return {
            "history": {t: list(v) for t, v in self.history.items()},
            "active": dict(self.active),
            "opened_empty": sorted(self.opened_empty_since_change),
            "found": dict(self.found_count),
            "turn": self.turn_count,
        }


def new_trial(config: SwmConfig, rng: random.Random | None = None) -> SwmTrial:
    rng = rng or random.Random(config.seed)
    n = config.n_boxes
    if config.uses_image:
        cells = [(x, y) for y in range(config.grid_height) for x in range(config.grid_width)]
        box_cells: list[Any] = sorted(rng.sample(cells, n), key=lambda c: (c[1], c[0]))
    else:
        box_cells = list(range(1, n + 1))
    history: dict[str, list[int]] = {}
    active: dict[str, int | None] = {}
    for t in config.token_types:
        b = rng.randrange(n)
        history[t] = [b]
        active[t] = b
    return SwmTrial(
        config=config,
        rng=rng,
        box_cells=box_cells,
        history=history,
        active=active,
        found_count={t: 0 for t in config.token_types},
    )


def regenerate_token(trial: SwmTrial, t: str, rng: random.Random | None = None) -> int | None:
    """Move token ``t`` to a uniformly chosen box that never held it; None when exhausted."""
    rng = rng or trial.rng
    eligible = [b for b in range(trial.n_boxes) if b not in trial.history[t]]
    if not eligible:
        trial.active[t] = None
        return None
    b = rng.choice(eligible)
    trial.history[t].append(b)
    trial.active[t] = b
    return b


def classify(trial: SwmTrial, guess: Guess) -> GuessOutcome:
    """Outcome of opening ``guess`` without mutating the trial."""
    box = trial.box_index(guess)
    if box is None:
        return GuessOutcome("no_box")
    found = tuple(t for t in trial.config.token_types if trial.active[t] == box)
    if found:
        return GuessOutcome("found", box, found)
    # no type could ever be (re)generated here
    if all(box in trial.history[t] for t in trial.config.token_types):
        return GuessOutcome("illegal", box)
    if box in trial.opened_empty_since_change:
        return GuessOutcome("repeated", box)
    return GuessOutcome("empty", box)


def apply_guess(trial: SwmTrial, guess: Guess, raw: str | None = None) -> GuessOutcome:
    if trial.done:
        raise RuntimeError("trial already terminated")
    outcome = classify(trial, guess)
    if outcome.kind == "found":
        for t in outcome.found:
            trial.found_count[t] += 1
        for t in outcome.found:
            regenerate_token(trial, t)
        trial.opened_empty_since_change.clear()
    elif outcome.kind == "empty":
        trial.opened_empty_since_change.add(outcome.box)  # type: ignore[arg-type]
    trial.turn_count += 1
    trial.guess_log.append(GuessRecord(raw, guess, outcome.kind, outcome.box, outcome.found))
    return outcome


def record_invalid(trial: SwmTrial, raw: str | None) -> GuessOutcome:
    """An unparseable answer: consumes a turn, changes nothing else."""
    if trial.done:
        raise RuntimeError("trial already terminated")
    trial.turn_count += 1
    trial.guess_log.append(GuessRecord(raw, None, "invalid", None, ()))
    return GuessOutcome("invalid")


@dataclass
class SwmScore:
    s_swm: float
    s_c: float
    tokens_score: float
    tokens_found: int
    tokens_required: int
    n_err: int
    n_valid: int
    illegal: int
    no_box: int
    repeated: int
    invalid_count: int
    guesses_used: int

    def as_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


def compute_score(
    tokens_found: int,
    tokens_required: int,
    n_err: int,
    n_valid: int,
) -> tuple[float, float]:
    """(S_swm, S_c); S_c is 0 when there were no parseable guesses."""
    s_c = 1.0 - n_err / n_valid if n_valid else 0.0
    return tokens_found / tokens_required * s_c, s_c


def score(trial: SwmTrial) -> SwmScore:
    counts = {k: 0 for k in ("found", "empty", "illegal", "no_box", "repeated", "invalid")}
    for rec in trial.guess_log:
        counts[rec.outcome] += 1
    n_err = counts["illegal"] + counts["no_box"] + counts["repeated"]
    n_valid = len(trial.guess_log) - counts["invalid"]
    t_f, t = trial.tokens_found, trial.config.tokens_required
    s_swm, s_c = compute_score(t_f, t, n_err, n_valid)
    return SwmScore(
        s_swm=s_swm,
        s_c=s_c,
        tokens_score=t_f / t,
        tokens_found=t_f,
        tokens_required=t,
        n_err=n_err,
        n_valid=n_valid,
        illegal=counts["illegal"],
        no_box=counts["no_box"],
        repeated=counts["repeated"],
        invalid_count=counts["invalid"],
        guesses_used=trial.turn_count,
    )


# -- rendering ---------------------------------------------------------------


def _token_phrase(types: tuple[str, ...]) -> str:
    if len(types) == 1:
        t = types[0]
        return f"a token of type {t} ({TOKEN_COLORS[t]})"
    names = " and ".join(f"{t} ({TOKEN_COLORS[t]})" for t in types)
    return f"a {MIXED_COLOR} mixed-color token (types {names})"


def result_line(trial: SwmTrial, outcome: GuessOutcome, raw_guess: Any = None) -> str:
    if outcome.kind == "invalid":
        return "Your answer could not be parsed."
    if outcome.kind == "no_box":
        shown = raw_guess if raw_guess is not None else "?"
        if isinstance(shown, tuple):
            shown = f"({shown[0]}, {shown[1]})"
        return f"There is no box {shown}."
    label = trial.label(outcome.box)  # type: ignore[arg-type]
    if outcome.kind == "found":
        return f"Found {_token_phrase(outcome.found)} in box {label}."
    return f"No tokens found in box {label}."


def render_svg(trial: SwmTrial, outcome: GuessOutcome | None = None) -> str:
    """Yellow box grid; the opened box carries a token glyph or an empty marker."""
    cfg = trial.config
    cell = 40
    doc = svg.Canvas(cfg.grid_width * cell + cell, cfg.grid_height * cell + 2 * cell)
    for x in range(cfg.grid_width):
        doc.text(cell + x * cell + cell / 2, cell * 0.6, str(x), size=12)
    for y in range(cfg.grid_height):
        doc.text(cell / 2, cell + y * cell + cell * 0.6, str(y), size=12)
    for b, (x, y) in enumerate(trial.box_cells):
        doc.rect(cell + x * cell + 4, cell + y * cell + 4, cell - 8, cell - 8, fill="yellow", cls="box",
                 stroke="black")
    if outcome is not None and outcome.box is not None:
        x, y = trial.box_cells[outcome.box]
        cx, cy = cell + x * cell + cell / 2, cell + y * cell + cell / 2
        if outcome.kind == "found":
            color = TOKEN_COLORS[outcome.found[0]] if len(outcome.found) == 1 else MIXED_COLOR
            doc.circle(cx, cy, cell / 4, fill=color, cls="token")
        else:
            doc.rect(cx - cell / 4, cy - cell / 4, cell / 2, cell / 2, fill="white", cls="opened",
                     stroke="gray")
    if outcome is not None:
        doc.text(doc.width / 2, doc.height - cell / 3, result_line(trial, outcome), size=14)
    return doc.render()


def render_notes(trial: SwmTrial) -> str:
    """Per-type found boxes and the boxes opened empty since the last regeneration."""
    lines = []
    for t in trial.config.token_types:
        boxes = "".join(f"{trial.label(b)}, " for b in trial.yielded(t))
        lines.append(f"Boxes that has contained token {t}: {boxes}")
    opened = "".join(f"{trial.label(b)}, " for b in sorted(trial.opened_empty_since_change))
    lines.append(f"Opened boxes: {opened}")
    return "\n".join(lines)
