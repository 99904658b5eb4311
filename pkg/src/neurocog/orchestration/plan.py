"""Run plans: a task matrix expanded into seeded trials.

A plan file (YAML or JSON) looks like::

    run_id: demo
    master_seed: 7
    agent: {kind: oracle}
    tasks:
      - task: swm
        difficulties: [easy, hard]
        modalities: [text]
        variants: [{notes: false}, {notes: true}]
      - task: rapm-text-mc
        count: 20
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .. import swm, wcst
from ..harness.agents import AGENT_KINDS, AgentConfig
from .seeds import derive_seed

TASKS = ("swm", "wcst", "rapm-text-mc", "rapm-text-gen")
DEFAULT_REPEATS = {"swm": 3, "wcst": 3, "rapm-text-mc": 1, "rapm-text-gen": 1}
ORACLE_FOR = {
    "swm": "oracle-swm-sweeper",
    "wcst": "oracle-wcst-eliminator",
    "rapm-text-mc": "oracle-rapm-solver",
    "rapm-text-gen": "oracle-rapm-solver",
}
VARIANT_KEYS = {
    "swm": {"notes", "cot", "think_budget"},
    "wcst": {"notes", "cot", "ambiguity", "note_window", "think_budget"},
    "rapm-text-mc": {"hint", "cot", "think_budget"},
    "rapm-text-gen": {"hint", "cot", "think_budget"},
}
DIFFICULTIES = ("easy", "hard")


class ConfigError(ValueError):
    """The run configuration is malformed."""


@dataclass
class TaskEntry:
    task: str
    difficulties: list[str] = field(default_factory=lambda: ["easy"])
    modalities: list[str] = field(default_factory=lambda: ["text"])
    variants: list[dict[str, Any]] = field(default_factory=lambda: [{}])
    repeats: int | None = None
    count: int = 1  # RAPM items per cell of the matrix

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}")
        rapm = self.task.startswith("rapm")
        if rapm:
            self.difficulties = ["-"]
            self.modalities = ["text"]
        for d in self.difficulties:
            if not rapm and d not in DIFFICULTIES:
                raise ConfigError(f"{self.task}: unknown difficulty {d!r}")
        allowed_modalities = swm.MODALITIES if self.task == "swm" else ("text", "image")
        for m in self.modalities:
            if m not in allowed_modalities:
                raise ConfigError(f"{self.task}: unknown modality {m!r}")
        for v in self.variants:
            if not isinstance(v, dict):
                raise ConfigError(f"{self.task}: variants must be mappings")
            extra = set(v) - VARIANT_KEYS[self.task]
            if extra:
                raise ConfigError(f"{self.task}: unsupported variant keys {sorted(extra)}")
            if self.task == "wcst":
                for d in self.difficulties:
                    amb = v.get("ambiguity", "off" if d == "easy" else "first")
                    try:
                        wcst.WcstConfig(difficulty=d, ambiguity=amb)
                    except ValueError as exc:
                        raise ConfigError(f"wcst: {exc}") from exc
        if self.repeats is not None and self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.count < 0:
            raise ConfigError("count must be >= 0")

    @property
    def n_repeats(self) -> int:
        return self.repeats if self.repeats is not None else DEFAULT_REPEATS[self.task]


def variant_label(variant: dict[str, Any]) -> str:
    if not variant:
        return "base"
    return ",".join(f"{k}={variant[k]}" for k in sorted(variant))


@dataclass(frozen=True)
class Trial:
    ordinal: int
    trial_id: str
    task: str
    difficulty: str
    modality: str
    variant: dict[str, Any]
    repeat: int
    seed: int

    @property
    def key(self) -> tuple[str, str, str, str]:
        return (self.task, self.difficulty, self.modality, variant_label(self.variant))

    def env_spec(self) -> dict[str, Any]:
        """Environment spec without the RAPM item (filled in by the runner)."""
        v = dict(self.variant)
        spec: dict[str, Any] = {"task": self.task, "seed": self.seed, "cot": v.pop("cot", True)}
        if "think_budget" in v:
            spec["think_budget"] = v.pop("think_budget")
        if self.task.startswith("rapm"):
            spec["hint"] = v.pop("hint", False)
        else:
            spec.update(difficulty=self.difficulty, modality=self.modality, notes=v.pop("notes", False))
            if self.task == "wcst":
                default_amb = "off" if self.difficulty == "easy" else "first"
                spec["ambiguity"] = v.pop("ambiguity", default_amb)
                spec["note_window"] = v.pop("note_window", 6)
        return spec


@dataclass
class RunPlan:
    run_id: str = "run"
    master_seed: int = 0
    agent: dict[str, Any] = field(default_factory=lambda: {"kind": "oracle"})
    tasks: list[TaskEntry] = field(default_factory=list)
    jobs: int = 1

    def __post_init__(self) -> None:
        if not self.run_id or "/" in self.run_id:
            raise ConfigError(f"invalid run id {self.run_id!r}")
        kind = self.agent.get("kind")
        if kind != "oracle" and kind not in AGENT_KINDS:
            raise ConfigError(f"unknown agent kind {kind!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        self.agent_config("swm")  # surfaces invalid agent settings early

    @property
    def model_label(self) -> str:
        return str(self.agent.get("model") or self.agent.get("label") or self.agent["kind"])

    def agent_config(self, task: str) -> AgentConfig:
        fields = {k: v for k, v in self.agent.items() if k != "label"}
        if fields.get("kind") == "oracle":
            fields["kind"] = ORACLE_FOR[task]
        try:
            return AgentConfig(**fields)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"agent config: {exc}") from exc

    def trials(self) -> list[Trial]:
        out: list[Trial] = []
        for entry in self.tasks:
            cells = itertools.product(entry.difficulties, entry.modalities, entry.variants)
            for diff, mod, variant in cells:
                reps = entry.count if entry.task.startswith("rapm") else entry.n_repeats
                for rep in range(reps):
                    k = len(out)
                    label = variant_label(variant).replace("=", "-").replace(",", "_")
                    tid = f"{k:05d}-{entry.task}-{diff}-{mod}-{label}-r{rep}".replace("+", "")
                    out.append(Trial(k, tid, entry.task, diff, mod, dict(variant), rep,
                                     derive_seed(self.master_seed, k)))
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "master_seed": self.master_seed,
            "agent": dict(self.agent),
            "jobs": self.jobs,
            "tasks": [asdict(t) for t in self.tasks],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RunPlan:
        if not isinstance(d, dict):
            raise ConfigError("plan must be a mapping")
        known = {"run_id", "master_seed", "agent", "tasks", "jobs"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown plan keys {sorted(extra)}")
        try:
            tasks = [TaskEntry(**t) for t in d.get("tasks", [])]
        except TypeError as exc:
            raise ConfigError(f"task entry: {exc}") from exc
        return cls(
            run_id=str(d.get("run_id", "run")),
            master_seed=int(d.get("master_seed", 0)),
            agent=dict(d.get("agent", {"kind": "oracle"})),
            tasks=tasks,
            jobs=int(d.get("jobs", 1)),
        )

    def digest(self) -> str:
        """Digest of everything that determines trial content (not ``jobs``)."""
        body = self.to_dict()
        body.pop("jobs")
        blob = json.dumps(body, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_plan(path: str | Path) -> RunPlan:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return RunPlan.from_dict(data or {})


def full_matrix_plan(run_id: str = "full", master_seed: int = 0, agent: dict[str, Any] | None = None,
                     rapm_count: int = 10) -> RunPlan:
    """Every task, difficulty and note/hint setting with text and image modalities."""
    notes = [{"notes": False}, {"notes": True}]
    tasks = [
        TaskEntry("swm", ["easy", "hard"], ["text", "image", "image+text"], notes),
        TaskEntry("wcst", ["easy"], ["text", "image"], notes),
        TaskEntry("wcst", ["hard"], ["text", "image"],
                  [{"notes": n, "ambiguity": a} for n in (False, True) for a in wcst.AMBIGUITY_MODES]),
        TaskEntry("rapm-text-mc", variants=[{"hint": False}, {"hint": True}], count=rapm_count),
        TaskEntry("rapm-text-gen", variants=[{"hint": False}, {"hint": True}], count=rapm_count),
    ]
    return RunPlan(run_id, master_seed, agent or {"kind": "oracle"}, tasks)
