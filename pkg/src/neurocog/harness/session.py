"""Session loop, JSONL transcripts, and replay from transcripts alone.

A transcript file is a sequence of JSON records, one per line:

* ``header``: schema version, ids, the environment spec, agent info, config digest, master seed
* ``message``: one conversation message (system / user / assistant)
* ``turn``: parse result, environment outcome and post-turn state digest
* ``score``: the final score dict

Records are appended as the session runs, so an interrupted session leaves
a readable prefix without a ``score`` record.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .agents import Agent, AgentError, ScriptedAgent
from .envs import make_env

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class ReplayMismatch(RuntimeError):
    """Replaying a transcript did not reproduce its recorded outcomes or score."""


class TranscriptError(ValueError):
    """A transcript file is malformed or incomplete."""


@dataclass
class TurnLog:
    turn: int
    raw: str | None
    valid: bool
    parsed: Any
    reason: str | None
    outcome: str
    state_digest: str
    agent_error: str | None = None
    detail: dict[str, Any] = field(default_factory=dict)

    def to_record(self) -> dict[str, Any]:
        return {"type": "turn", **self.__dict__}

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> TurnLog:
        return cls(**{k: v for k, v in rec.items() if k != "type"})


@dataclass
class Transcript:
    run_id: str
    trial_id: str
    spec: dict[str, Any]
    agent: dict[str, Any] = field(default_factory=dict)
    config_digest: str = ""
    master_seed: int | None = None
    messages: list[dict[str, Any]] = field(default_factory=list)
    turns: list[TurnLog] = field(default_factory=list)
    score: dict[str, Any] | None = None

    @property
    def task(self) -> str:
        return self.spec["task"]

    @property
    def seed(self) -> int:
        return self.spec["seed"]

    @property
    def complete(self) -> bool:
        return self.score is not None

    def header(self) -> dict[str, Any]:
        return {
            "type": "header",
            "schema_version": SCHEMA_VERSION,
            "run_id": self.run_id,
            "trial_id": self.trial_id,
            "task": self.task,
            "seed": self.seed,
            "spec": self.spec,
            "agent": self.agent,
            "config_digest": self.config_digest,
            "master_seed": self.master_seed,
        }

    def records(self) -> list[dict[str, Any]]:
        out = [self.header()]
        out += [{"type": "message", **m} for m in self.messages]
        out += [t.to_record() for t in self.turns]
        if self.score is not None:
            out.append({"type": "score", "score": self.score})
        return out

    @classmethod
    def from_records(cls, records: Iterable[dict[str, Any]]) -> Transcript:
        it = iter(records)
        head = next(it, None)
        if not head or head.get("type") != "header":
            raise TranscriptError("transcript does not start with a header record")
        if head.get("schema_version") != SCHEMA_VERSION:
            raise TranscriptError(f"unsupported schema version {head.get('schema_version')!r}")
        tr = cls(
            run_id=head["run_id"],
            trial_id=head["trial_id"],
            spec=head["spec"],
            agent=head.get("agent", {}),
            config_digest=head.get("config_digest", ""),
            master_seed=head.get("master_seed"),
        )
        for rec in it:
            kind = rec.get("type")
            if kind == "message":
                tr.messages.append({k: v for k, v in rec.items() if k != "type"})
            elif kind == "turn":
                tr.turns.append(TurnLog.from_record(rec))
            elif kind == "score":
                tr.score = rec["score"]
            else:
                raise TranscriptError(f"unknown record type {kind!r}")
        return tr


def _dumps(rec: dict[str, Any]) -> str:
    return json.dumps(rec, sort_keys=True, ensure_ascii=False)


class TranscriptWriter:
    """Append-only JSONL writer; each record is flushed as soon as it is produced."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("w", encoding="utf-8")

    def write(self, rec: dict[str, Any]) -> None:
        self._fh.write(_dumps(rec) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def write_transcript(tr: Transcript, path: str | Path) -> None:
    w = TranscriptWriter(path)
    try:
        for rec in tr.records():
            w.write(rec)
    finally:
        w.close()


def read_transcript(path: str | Path) -> Transcript:
    with Path(path).open(encoding="utf-8") as fh:
        records = [json.loads(line) for line in fh if line.strip()]
    return Transcript.from_records(records)


def _jsonable(value: Any) -> Any:
    return list(value) if isinstance(value, tuple) else value


def run_session(
    env,
    agent: Agent,
    *,
    run_id: str = "adhoc",
    trial_id: str = "trial",
    agent_info: dict[str, Any] | None = None,
    config_digest: str = "",
    master_seed: int | None = None,
    path: str | Path | None = None,
) -> Transcript:
    """Drive ``agent`` through ``env`` until it terminates; returns the transcript.

    When ``path`` is given, records are appended there as they happen.
    """
    tr = Transcript(run_id, trial_id, env.spec, agent_info or {}, config_digest, master_seed)
    writer = TranscriptWriter(path) if path is not None else None

    def emit(rec: dict[str, Any]) -> None:
        if writer is not None:
            writer.write(rec)

    def say(role: str, content: str, image: str | None = None) -> None:
        msg: dict[str, Any] = {"role": role, "content": content}
        if image is not None:
            msg["image"] = image
        tr.messages.append(msg)
        emit({"type": "message", **msg})

    try:
        emit(tr.header())
        agent.reset(env.spec)
        say("system", env.system_prompt())
        prompt = env.first_prompt()
        say("user", prompt.text, prompt.image)
        turn = 0
        while not env.done:
            turn += 1
            error = None
            try:
                raw = agent.respond(tr.messages, env.observation())
            except AgentError as exc:
                raw, error = None, str(exc)
                logger.warning("%s turn %d: agent error: %s", trial_id, turn, exc)
            say("assistant", raw or "")
            res = env.step(raw)
            log = TurnLog(
                turn=turn,
                raw=raw,
                valid=res.parse.valid,
                parsed=_jsonable(res.parse.value),
                reason=res.parse.reason,
                outcome=res.outcome,
                state_digest=env.state_digest(),
                agent_error=error,
                detail=res.detail,
            )
            tr.turns.append(log)
            emit(log.to_record())
            if res.prompt is not None:
                say("user", res.prompt.text, res.prompt.image)
        tr.score = env.score()
        emit({"type": "score", "score": tr.score})
    finally:
        if writer is not None:
            writer.close()
    return tr


def check_alternation(tr: Transcript) -> bool:
    """System first, then user and assistant strictly alternating."""
    roles = [m["role"] for m in tr.messages]
    if not roles or roles[0] != "system":
        return False
    return all(r == ("user" if i % 2 == 0 else "assistant") for i, r in enumerate(roles[1:]))


def replay(tr: Transcript) -> dict[str, Any]:
    """Rebuild the environment from the transcript spec, feed the recorded raw
    answers, and return the recomputed score. Any divergence raises ReplayMismatch."""
    if not tr.complete:
        raise TranscriptError(f"{tr.trial_id}: transcript has no score record")
    env = make_env(tr.spec)
    agent = ScriptedAgent([t.raw for t in tr.turns])
    fresh = run_session(env, agent, run_id=tr.run_id, trial_id=tr.trial_id)
    if len(fresh.turns) != len(tr.turns):
        raise ReplayMismatch(
            f"{tr.trial_id}: replay ran {len(fresh.turns)} turns, transcript has {len(tr.turns)}"
        )
    for old, new in zip(tr.turns, fresh.turns):
        for key in ("valid", "outcome", "state_digest"):
            if getattr(old, key) != getattr(new, key):
                raise ReplayMismatch(
                    f"{tr.trial_id} turn {old.turn}: recorded {key}={getattr(old, key)!r}, "
                    f"replayed {getattr(new, key)!r}"
                )
    recomputed = json.loads(json.dumps(fresh.score))
    if recomputed != tr.score:
        raise ReplayMismatch(f"{tr.trial_id}: score mismatch {tr.score!r} != {recomputed!r}")
    return recomputed
