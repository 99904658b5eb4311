"""Wisconsin Card Sorting Test: silent rule switching, ambiguity control, S_wcst / PR / FMS."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Any

from . import svg

ATTRIBUTES = ("number", "color", "shape", "background")
VALUES: dict[str, tuple] = {
    "number": (1, 2, 3, 4),
    "color": ("red", "green", "blue", "yellow"),
    "shape": ("triangle", "square", "star", "circle"),
    "background": ("white", "purple", "orange", "cyan"),
}
ATTRIBUTE_LABELS = {
    "number": "number of symbols",
    "color": "symbol color",
    "shape": "symbol shape",
    "background": "background color",
}
NUMBER_WORDS = {1: "one", 2: "two", 3: "three", 4: "four"}

CORRECT = "Correct!"
INCORRECT = "Incorrect. Please try again."
BAD_FORMAT = (
    "Incorrect format. Your final answer should be a number between 1-4, "
    "wrapped with <answer> and </answer>."
)

_LEVELS = {
    # rules, rule instances, guess cap
    "easy": (("color", "shape", "number"), 6, 64),
    "hard": (("color", "shape", "number", "background"), 8, 96),
}
AMBIGUITY_MODES = ("off", "first", "rest")
MAX_DEAL_TRIES = 1000


@dataclass(frozen=True)
class Card:
    number: int
    color: str
    shape: str
    background: str | None = None

    def describe(self) -> str:
        text = f"{NUMBER_WORDS[self.number]} {self.color} {self.shape}"
        if self.background is not None:
            text += f" on {self.background} background"
        return text

    def to_dict(self) -> dict[str, Any]:
        d = {"number": self.number, "color": self.color, "shape": self.shape}
        if self.background is not None:
            d["background"] = self.background
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Card:
        return cls(d["number"], d["color"], d["shape"], d.get("background"))


def matched_attributes(given: Card, option: Card, attributes: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(a for a in attributes if getattr(given, a) == getattr(option, a))


@dataclass
class WcstConfig:
    difficulty: str = "easy"
    ambiguity: str = "off"
    modality: str = "text"
    notes: bool = False
    note_window: int = 6
    consecutive_required: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.difficulty not in _LEVELS:
            raise ValueError(f"unknown difficulty {self.difficulty!r}")
        if self.ambiguity not in AMBIGUITY_MODES:
            raise ValueError(f"unknown ambiguity mode {self.ambiguity!r}")
        if self.difficulty == "easy" and self.ambiguity != "off":
            raise ValueError("ambiguity variants exist only for the hard setting")
        if self.modality not in ("text", "image"):
            raise ValueError(f"unknown modality {self.modality!r}")

    @property
    def rules(self) -> tuple[str, ...]:
        return _LEVELS[self.difficulty][0]

    @property
    def attributes(self) -> tuple[str, ...]:
        return tuple(a for a in ATTRIBUTES if a in self.rules)

    @property
    def rule_instances(self) -> int:
        return _LEVELS[self.difficulty][1]

    @property
    def guess_cap(self) -> int:
        return _LEVELS[self.difficulty][2]


@dataclass
class Round:
    given: Card
    options: list[Card]
    correct: int  # 1-based index of the option matching the active rule
    rule: str
    block: int
    ambiguous: bool


@dataclass
class TurnRecord:
    given: Card
    options: list[Card]
    choice: int | None  # 1-based; None when the answer was unparseable
    matched: tuple[str, ...]
    correct: bool | None
    block: int
    invalid: bool
    eliminated: tuple[str, ...]  # rules eliminated earlier in this block

    def to_dict(self) -> dict[str, Any]:
        return {
            "given": self.given.to_dict(),
            "options": [o.to_dict() for o in self.options],
            "choice": self.choice,
            "matched": list(self.matched),
            "correct": self.correct,
            "block": self.block,
            "invalid": self.invalid,
            "eliminated": list(self.eliminated),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> TurnRecord:
        return cls(
            given=Card.from_dict(d["given"]),
            options=[Card.from_dict(o) for o in d["options"]],
            choice=d["choice"],
            matched=tuple(d["matched"]),
            correct=d["correct"],
            block=d["block"],
            invalid=d["invalid"],
            eliminated=tuple(d["eliminated"]),
        )


@dataclass
class WcstTrial:
    config: WcstConfig
    rng: random.Random
    schedule: list[str]
    block_index: int = 0
    consecutive_correct: int = 0
    rounds_in_block: int = 0
    block_guesses: list[int] = field(default_factory=list)
    eliminated: set[str] = field(default_factory=set)
    turn_log: list[TurnRecord] = field(default_factory=list)
    turn_count: int = 0
    current: Round | None = None

    @property
    def active_rule(self) -> str | None:
        if self.block_index >= len(self.schedule):
            return None
        return self.schedule[self.block_index]

    @property
    def completed_rules(self) -> int:
        return min(self.block_index, len(self.schedule))

    @property
    def done(self) -> bool:
        return self.block_index >= len(self.schedule) or self.turn_count >= self.config.guess_cap

    def digest_state(self) -> dict[str, Any]:
        return {
            "block": self.block_index,
            "consecutive": self.consecutive_correct,
            "guesses": list(self.block_guesses),
            "eliminated": sorted(self.eliminated),
            "turn": self.turn_count,
        }


def make_schedule(rules: tuple[str, ...], n: int, rng: random.Random) -> list[str]:
    """Shuffle of each rule repeated n/len(rules) times, no rule twice in a row."""
    pool = [r for r in rules for _ in range(n // len(rules))]
    while True:
        rng.shuffle(pool)
        if all(a != b for a, b in zip(pool, pool[1:])):
            return list(pool)


def new_trial(config: WcstConfig, rng: random.Random | None = None) -> WcstTrial:
    rng = rng or random.Random(config.seed)
    schedule = make_schedule(config.rules, config.rule_instances, rng)
    trial = WcstTrial(config=config, rng=rng, schedule=schedule, block_guesses=[0] * len(schedule))
    deal_round(trial)
    return trial


def _random_card(attrs: tuple[str, ...], rng: random.Random) -> dict[str, Any]:
    return {a: rng.choice(VALUES[a]) for a in attrs}


def _differ(value: Any, attr: str, rng: random.Random) -> Any:
    return rng.choice([v for v in VALUES[attr] if v != value])


def _card(values: dict[str, Any]) -> Card:
    return Card(values["number"], values["color"], values["shape"], values.get("background"))


def deal_round(trial: WcstTrial, rng: random.Random | None = None) -> Round:
    """Deal a given card and four options for the active rule.

    Exactly one option shares the active attribute with the given card. In an
    ambiguous round that option also shares at least one other attribute;
    otherwise it shares none. Every other option shares at most one
    non-active attribute.
    """
    rng = rng or trial.rng
    cfg = trial.config
    rule = trial.active_rule
    if rule is None:
        raise RuntimeError("no active rule; trial finished")
    attrs = cfg.attributes
    others = [a for a in attrs if a != rule]
    first = trial.rounds_in_block == 0
    ambiguous = (cfg.ambiguity == "first" and first) or (cfg.ambiguity == "rest" and not first)
    for _ in range(MAX_DEAL_TRIES):
        given = _random_card(attrs, rng)
        shared = set(rng.sample(others, rng.randint(1, len(others) - 1))) if ambiguous else set()
        correct = {
            a: given[a] if a == rule or a in shared else _differ(given[a], a, rng) for a in attrs
        }
        distractors = []
        for _ in range(3):
            keep = rng.choice(others + [None])
            distractors.append(
                {a: given[a] if a == keep else _differ(given[a], a, rng) for a in attrs}
            )
        cards = [_card(given), _card(correct)] + [_card(d) for d in distractors]
        if len(set(cards)) == len(cards):
            break
    else:  # pragma: no cover - distinct cards are found within a handful of tries
        raise RuntimeError("could not deal distinct cards")
    options = cards[1:]
    order = list(range(4))
    rng.shuffle(order)
    options = [options[k] for k in order]
    rnd = Round(
        given=cards[0],
        options=options,
        correct=order.index(0) + 1,
        rule=rule,
        block=trial.block_index,
        ambiguous=ambiguous,
    )
    trial.current = rnd
    trial.rounds_in_block += 1
    return rnd


def apply_choice(trial: WcstTrial, choice: int | None) -> str:
    """Apply a 1-based choice (None = unparseable); returns the feedback string.

    A wrong or unparseable answer re-presents the same round; a correct one
    deals a fresh round, switching the rule silently after ``c`` in a row.
    """
    if trial.done or trial.current is None:
        raise RuntimeError("trial already terminated")
    rnd = trial.current
    attrs = trial.config.attributes
    trial.turn_count += 1
    if choice is None or not 1 <= choice <= 4:
        trial.turn_log.append(
            TurnRecord(rnd.given, rnd.options, None, (), None, rnd.block, True,
                       tuple(a for a in attrs if a in trial.eliminated))
        )
        return BAD_FORMAT
    matched = matched_attributes(rnd.given, rnd.options[choice - 1], attrs)
    correct = rnd.rule in matched
    trial.turn_log.append(
        TurnRecord(rnd.given, rnd.options, choice, matched, correct, rnd.block, False,
                   tuple(a for a in attrs if a in trial.eliminated))
    )
    trial.block_guesses[trial.block_index] += 1
    if not correct:
        trial.consecutive_correct = 0
        trial.eliminated.update(matched)
        return INCORRECT
    trial.consecutive_correct += 1
    if trial.consecutive_correct >= trial.config.consecutive_required:
        trial.block_index += 1
        trial.consecutive_correct = 0
        trial.rounds_in_block = 0
        trial.eliminated = set()
    if not trial.done:
        deal_round(trial)
    return CORRECT


# -- scoring -----------------------------------------------------------------


@dataclass
class WcstScore:
    s_wcst: float
    accuracy: float
    fms: float
    pr: float
    completed_rules: int
    rule_instances: int
    first_rule_trials: int | None
    block_guesses: list[int]
    invalid_count: int
    turns: int

    def as_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


def block_guess_counts(log: list[TurnRecord], n_blocks: int) -> list[int]:
    g = [0] * n_blocks
    for rec in log:
        if not rec.invalid:
            g[rec.block] += 1
    return g


def completed_blocks(log: list[TurnRecord], c: int) -> list[int]:
    """Blocks whose parseable turns end in ``c`` consecutive corrects."""
    runs: dict[int, int] = {}
    done: list[int] = []
    for rec in log:
        if rec.invalid:
            continue
        runs[rec.block] = runs.get(rec.block, 0) + 1 if rec.correct else 0
        if runs[rec.block] == c and rec.block not in done:
            done.append(rec.block)
    return done


def s_wcst_from_guesses(guesses: list[int], n_instances: int, c: int = 5) -> float:
    """(1/N) * sum of c/g_i over completed instances; unfinished ones contribute 0."""
    return sum(c / g for g in guesses) / n_instances


def compute_s_wcst(log: list[TurnRecord], n_instances: int, c: int = 5) -> float:
    g = block_guess_counts(log, n_instances)
    return s_wcst_from_guesses([g[k] for k in completed_blocks(log, c)], n_instances, c)


def compute_pr(log: list[TurnRecord]) -> float:
    """Share of turns, among those after some rule was eliminated in the block,
    whose matched attributes are all already eliminated."""
    num = den = 0
    for rec in log:
        if rec.invalid or not rec.eliminated:
            continue
        den += 1
        if rec.matched and set(rec.matched) <= set(rec.eliminated):
            num += 1
    return num / den if den else 0.0


def compute_fms(log: list[TurnRecord], m: int = 3) -> float:
    """Error rate on turns after a block's first run of ``m`` consecutive corrects."""
    streak: dict[int, int] = {}
    acquired: set[int] = set()
    errors = total = 0
    for rec in log:
        if rec.invalid:
            continue
        k = rec.block
        if k in acquired:
            total += 1
            errors += not rec.correct
            continue
        streak[k] = streak.get(k, 0) + 1 if rec.correct else 0
        if streak[k] >= m:
            acquired.add(k)
    return errors / total if total else 0.0


def score(trial: WcstTrial) -> WcstScore:
    return score_log(trial.turn_log, trial.config)


def score_log(log: list[TurnRecord], config: WcstConfig) -> WcstScore:
    c = config.consecutive_required
    n = config.rule_instances
    g = block_guess_counts(log, n)
    done = completed_blocks(log, c)
    parseable = [r for r in log if not r.invalid]
    return WcstScore(
        s_wcst=s_wcst_from_guesses([g[k] for k in done], n, c),
        accuracy=sum(bool(r.correct) for r in parseable) / len(parseable) if parseable else 0.0,
        fms=compute_fms(log),
        pr=compute_pr(log),
        completed_rules=len(done),
        rule_instances=n,
        first_rule_trials=g[done[0]] if done else None,
        block_guesses=g,
        invalid_count=len(log) - len(parseable),
        turns=len(log),
    )


# -- rendering ---------------------------------------------------------------


def describe_round(rnd: Round) -> str:
    lines = [f"Given: {rnd.given.describe()}", "Options:"]
    lines += [f"{i}. {card.describe()}" for i, card in enumerate(rnd.options, 1)]
    return "\n".join(lines)


def matched_phrase(matched: tuple[str, ...]) -> str:
    if not matched:
        return "no attribute"
    return " and ".join(ATTRIBUTE_LABELS[a] for a in matched)


def render_notes(trial: WcstTrial) -> str:
    """The last ``note_window`` parseable turns, most recent first."""
    recent = [r for r in trial.turn_log if not r.invalid][-trial.config.note_window:]
    lines = ["Recent notes:"]
    for j, rec in enumerate(reversed(recent), 1):
        verdict = "Correct." if rec.correct else "Incorrect."
        lines.append(f"- Turn -{j}: matching {matched_phrase(rec.matched)} -- {verdict}")
    return "\n".join(lines)


def _star(cx: float, cy: float, r: float) -> list[tuple[float, float]]:
    pts = []
    for k in range(10):
        rad = r if k % 2 == 0 else r * 0.45
        ang = -math.pi / 2 + k * math.pi / 5
        pts.append((round(cx + rad * math.cos(ang), 2), round(cy + rad * math.sin(ang), 2)))
    return pts


def _draw_card(doc: svg.Canvas, card: Card, x: float, y: float, w: float, h: float, label: str) -> None:
    doc.open_group("card", label=label)
    doc.rect(x, y, w, h, fill=card.background or "white", stroke="black", rx=6)
    r = w / 7
    for k in range(card.number):
        cx = x + w / 2
        cy = y + h * (k + 1) / (card.number + 1)
        if card.shape == "circle":
            doc.circle(cx, cy, r, fill=card.color, cls="symbol")
        elif card.shape == "square":
            doc.rect(cx - r, cy - r, 2 * r, 2 * r, fill=card.color, cls="symbol")
        elif card.shape == "triangle":
            doc.polygon([(cx, cy - r), (cx - r, cy + r), (cx + r, cy + r)], fill=card.color, cls="symbol")
        else:
            doc.polygon(_star(cx, cy, r * 1.2), fill=card.color, cls="symbol")
    doc.close_group()
    doc.text(x + w / 2, y + h + 20, label, size=14)


def render_svg(rnd: Round) -> str:
    """One panel: the given card followed by option cards 1-4."""
    w, h, gap = 100, 160, 30
    doc = svg.Canvas(5 * w + 7 * gap, h + 60)
    _draw_card(doc, rnd.given, gap, 10, w, h, "Given")
    for i, card in enumerate(rnd.options, 1):
        _draw_card(doc, card, gap + i * (w + gap) + gap, 10, w, h, str(i))
    return doc.render()
