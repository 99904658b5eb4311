"""Task environments exposing a common multi-turn interface to the session loop.

Each environment is rebuilt exactly from its ``spec`` dict, which is what
transcripts store and what replay uses.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

from .. import swm, wcst
from ..rapm import RapmItem, cell_satisfies
from . import prompts
from .parsing import ParseResult, parse_answer


@dataclass
class Prompt:
    text: str
    image: str | None = None  # SVG document


@dataclass
class StepResult:
    parse: ParseResult
    outcome: str
    prompt: Prompt | None  # next prompt, None once the episode is over
    done: bool
    detail: dict[str, Any] = field(default_factory=dict)


def _digest(state: dict[str, Any]) -> str:
    blob = json.dumps(state, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


class RapmEnv:
    """Single-turn text RAPM item in MC or Gen format."""

    def __init__(self, item: RapmItem, mode: str = "mc", hint: bool = False, cot: bool = True,
                 think_budget: int | None = None):
        if mode not in ("mc", "gen"):
            raise ValueError(f"unknown RAPM mode {mode!r}")
        self.item = item
        self.mode = mode
        self.hint = hint
        self.cot = cot
        self.think_budget = think_budget
        self.task = f"rapm-text-{mode}"
        self.answered = False
        self.correct = False
        self.invalid = False
        self.answer: Any = None

    @property
    def spec(self) -> dict[str, Any]:
        return {
            "task": self.task,
            "hint": self.hint,
            "cot": self.cot,
            "think_budget": self.think_budget,
            "seed": self.item.seed,
            "item": self.item.to_dict(),
        }

    @property
    def done(self) -> bool:
        return self.answered

    def system_prompt(self) -> str:
        return prompts.build_system_prompt(
            self.task, hint=self.hint, cot=self.cot, think_budget=self.think_budget
        )

    def first_prompt(self) -> Prompt:
        g = self.item.grid
        rows = []
        for i in range(3):
            cells = [g[i][j] if (i, j) != (2, 2) else "?" for j in range(3)]
            rows.append(f"Row {i + 1}: " + " | ".join(cells))
        text = "Matrix:\n" + "\n".join(rows)
        if self.mode == "mc":
            text += "\nOptions:\n" + "\n".join(
                f"{k}. {o}" for k, o in enumerate(self.item.options, 1)
            )
        return Prompt(text)

    def step(self, raw: str | None) -> StepResult:
        if self.mode == "mc":
            parsed = parse_answer(raw, "int", 1, len(self.item.options))
            ok = parsed.valid and parsed.value == self.item.correct_index + 1
        else:
            parsed = parse_answer(raw, "string")
            ok = parsed.valid and cell_satisfies(parsed.value, self.item.target)
        self.answered = True
        self.invalid = not parsed.valid
        self.correct = bool(ok)
        self.answer = parsed.value
        outcome = "invalid" if self.invalid else ("correct" if ok else "incorrect")
        return StepResult(parsed, outcome, None, True)

    def observation(self) -> dict[str, Any]:
        return {"task": self.task, "item": self.item, "mode": self.mode}

    def state_digest(self) -> str:
        return _digest({"answered": self.answered, "correct": self.correct, "answer": self.answer})

    def score(self) -> dict[str, Any]:
        return {"accuracy": 1.0 if self.correct else 0.0, "correct": self.correct, "invalid": self.invalid}


class SwmEnv:
    def __init__(self, config: swm.SwmConfig, cot: bool = True, think_budget: int | None = None):
        self.config = config
        self.cot = cot
        self.think_budget = think_budget or prompts.TURN_THINK_BUDGET
        self.task = "swm"
        self.trial = swm.new_trial(config)
        self._last: dict[str, Any] | None = None

    @property
    def spec(self) -> dict[str, Any]:
        c = self.config
        return {
            "task": "swm",
            "difficulty": c.difficulty,
            "modality": c.modality,
            "notes": c.notes,
            "seed": c.seed,
            "cot": self.cot,
            "think_budget": self.think_budget,
        }

    @property
    def done(self) -> bool:
        return self.trial.done

    def system_prompt(self) -> str:
        c = self.config
        return prompts.build_system_prompt(
            "swm",
            difficulty=c.difficulty,
            modality=c.modality,
            cot=self.cot,
            think_budget=self.think_budget,
            n_boxes=c.n_boxes,
            n_tokens=c.n_token_types,
        )

    def _prompt(self, outcome: swm.GuessOutcome | None, guess: Any = None) -> Prompt:
        c = self.config
        lines = []
        if outcome is not None and (c.modality != "image" or outcome.kind == "invalid"):
            lines.append(swm.result_line(self.trial, outcome, guess))
        if c.notes:
            lines.append(swm.render_notes(self.trial))
        if self.cot:
            lines.append(prompts.SWM_TURN_COT.format(think_budget=self.think_budget))
        lines.append(f"Which of the {c.n_boxes} boxes would you like to open?")
        lines.append(prompts.answer_instruction("coordinate" if c.uses_image else "box"))
        image = swm.render_svg(self.trial, outcome) if c.uses_image else None
        return Prompt("\n".join(lines), image)

    def first_prompt(self) -> Prompt:
        return self._prompt(None)

    def step(self, raw: str | None) -> StepResult:
        kind = "coordinate" if self.config.uses_image else "int"
        parsed = parse_answer(raw, kind)
        if parsed.valid:
            outcome = swm.apply_guess(self.trial, parsed.value, raw)
        else:
            outcome = swm.record_invalid(self.trial, raw)
        shown = outcome.kind if outcome.kind in ("found", "no_box", "invalid") else "empty"
        self._last = {
            "event": shown,
            "box": self.trial.label(outcome.box) if outcome.box is not None else None,
            "found": list(outcome.found),
        }
        done = self.trial.done
        nxt = None if done else self._prompt(outcome, parsed.value)
        return StepResult(parsed, outcome.kind, nxt, done, {"found": list(outcome.found)})

    def observation(self) -> dict[str, Any]:
        return {
            "task": "swm",
            "boxes": [self.trial.label(b) for b in range(self.trial.n_boxes)],
            "token_types": list(self.config.token_types),
            "last": self._last,
        }

    def state_digest(self) -> str:
        return _digest(self.trial.digest_state())

    def score(self) -> dict[str, Any]:
        return swm.score(self.trial).as_dict()


class WcstEnv:
    def __init__(self, config: wcst.WcstConfig, cot: bool = True, think_budget: int | None = None):
        self.config = config
        self.cot = cot
        self.think_budget = think_budget or prompts.TURN_THINK_BUDGET
        self.task = "wcst"
        self.trial = wcst.new_trial(config)
        self._feedback: str | None = None

    @property
    def spec(self) -> dict[str, Any]:
        c = self.config
        return {
            "task": "wcst",
            "difficulty": c.difficulty,
            "ambiguity": c.ambiguity,
            "modality": c.modality,
            "notes": c.notes,
            "note_window": c.note_window,
            "seed": c.seed,
            "cot": self.cot,
            "think_budget": self.think_budget,
        }

    @property
    def done(self) -> bool:
        return self.trial.done

    def system_prompt(self) -> str:
        return prompts.build_system_prompt(
            "wcst", difficulty=self.config.difficulty, cot=self.cot, think_budget=self.think_budget
        )

    def _prompt(self, feedback: str | None) -> Prompt:
        rnd = self.trial.current
        lines = [feedback] if feedback else []
        if self.config.notes:
            lines.append(wcst.render_notes(self.trial))
        image = None
        if self.config.modality == "image":
            lines.append(
                "Look at the image showing 5 cards. Match the 'Given' card to one of cards 1-4 "
                "based on the rule you need to figure out."
            )
            image = wcst.render_svg(rnd)
        else:
            lines.append(wcst.describe_round(rnd))
        lines.append(prompts.answer_instruction("card"))
        return Prompt("\n".join(lines), image)

    def first_prompt(self) -> Prompt:
        return self._prompt(None)

    def step(self, raw: str | None) -> StepResult:
        parsed = parse_answer(raw, "int", 1, 4)
        feedback = wcst.apply_choice(self.trial, parsed.value if parsed.valid else None)
        rec = self.trial.turn_log[-1]
        outcome = "invalid" if rec.invalid else ("correct" if rec.correct else "incorrect")
        self._feedback = outcome
        done = self.trial.done
        nxt = None if done else self._prompt(feedback)
        return StepResult(parsed, outcome, nxt, done, rec.to_dict())

    def observation(self) -> dict[str, Any]:
        rnd = self.trial.current
        return {
            "task": "wcst",
            "attributes": list(self.config.attributes),
            "given": rnd.given if rnd else None,
            "options": list(rnd.options) if rnd else [],
            "feedback": self._feedback,
        }

    def state_digest(self) -> str:
        return _digest(self.trial.digest_state())

    def score(self) -> dict[str, Any]:
        return wcst.score(self.trial).as_dict()


def make_env(spec: dict[str, Any]):
    """Build a fresh environment from a spec dict (as stored in transcripts)."""
    task = spec["task"]
    if task in ("rapm-text-mc", "rapm-text-gen"):
        item = RapmItem.from_dict(spec["item"])
        return RapmEnv(item, task.rsplit("-", 1)[1], spec.get("hint", False), spec.get("cot", True),
                       spec.get("think_budget"))
    if task == "swm":
        cfg = swm.SwmConfig(
            difficulty=spec.get("difficulty", "easy"),
            modality=spec.get("modality", "text"),
            notes=spec.get("notes", False),
            seed=spec["seed"],
        )
        return SwmEnv(cfg, spec.get("cot", True), spec.get("think_budget"))
    if task == "wcst":
        cfg = wcst.WcstConfig(
            difficulty=spec.get("difficulty", "easy"),
            ambiguity=spec.get("ambiguity", "off"),
            modality=spec.get("modality", "text"),
            notes=spec.get("notes", False),
            note_window=spec.get("note_window", 6),
            seed=spec["seed"],
        )
        return WcstEnv(cfg, spec.get("cot", True), spec.get("think_budget"))
    raise ValueError(f"unknown task {task!r}")

