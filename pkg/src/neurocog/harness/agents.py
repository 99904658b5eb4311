"""Agents: remote chat endpoint, scripted replay, and the three oracle solvers.

An agent receives the full conversation (``messages``) plus a structured
``observation`` carrying only what the rendered feedback already tells a
participant. Remote agents ignore the observation; oracles ignore the text.
"""

from __future__ import annotations

import base64
import json
import logging
import os
import random
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Any, Protocol

from ..rapm import cell_satisfies, generate_cell

logger = logging.getLogger(__name__)

AGENT_KINDS = (
    "remote-chat",
    "scripted",
    "oracle-swm-sweeper",
    "oracle-wcst-eliminator",
    "oracle-rapm-solver",
)


class AgentError(RuntimeError):
    """The agent could not produce a reply (transport failure after retries)."""


class Agent(Protocol):
    def reset(self, spec: dict[str, Any]) -> None: ...

    def respond(self, messages: list[dict[str, Any]], observation: dict[str, Any]) -> str: ...


@dataclass
class AgentConfig:
    kind: str = "scripted"
    endpoint: str | None = None
    model: str | None = None
    temperature: float = 0.0
    max_tokens: int = 8192
    think_budget: int | None = None
    reasoning_prompt: bool = True
    retries: int = 3
    timeout: float = 120.0
    api_key_env: str = "NEUROCOG_API_KEY"
    replies: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.kind not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind {self.kind!r}")
        if self.kind == "remote-chat" and not (self.endpoint and self.model):
            raise ValueError("remote-chat agents need an endpoint and a model identifier")

    @property
    def label(self) -> str:
        return self.model or self.kind


def _tag(value: Any) -> str:
    return f"<answer>{value}</answer>"


class ScriptedAgent:
    """Replays a fixed list of replies; answers with nothing once exhausted."""

    def __init__(self, replies: list[str]):
        self.replies = list(replies)
        self._i = 0

    def reset(self, spec: dict[str, Any]) -> None:
        self._i = 0

    def respond(self, messages, observation) -> str:
        if self._i >= len(self.replies):
            return ""
        reply = self.replies[self._i]
        self._i += 1
        return reply


class SwmSweeper:
    """Systematic elimination: never reopens a box that cannot hold a token.

    Tracks, per token type, boxes where it was found and boxes opened without
    it since its last regeneration; opens the first box (in listing order)
    still possible for every active type, else for any active type.
    """

    def reset(self, spec: dict[str, Any]) -> None:
        self.found: dict[str, list[str]] = {}
        self.empty: dict[str, set[str]] = {}
        self.last_box: str | None = None

    def _update(self, obs: dict[str, Any]) -> None:
        if not self.found:
            self.found = {t: [] for t in obs["token_types"]}
            self.empty = {t: set() for t in obs["token_types"]}
        last = obs.get("last")
        if not last or last["box"] is None:
            return
        box = last["box"]
        for t in self.found:
            if t in last["found"]:
                self.found[t].append(box)
                self.empty[t] = set()
            else:
                self.empty[t].add(box)

    def respond(self, messages, observation) -> str:
        self._update(observation)
        boxes = observation["boxes"]
        active = [t for t in self.found if len(self.found[t]) < len(boxes)]
        possible = {
            t: [b for b in boxes if b not in self.found[t] and b not in self.empty[t]] for t in active
        }
        every = [b for b in boxes if all(b in possible[t] for t in active)]
        some = [b for b in boxes if any(b in possible[t] for t in active)]
        choice = (every or some or boxes)[0]
        return _tag(choice)


class WcstEliminator:
    """Hypothesis elimination over the sorting rules.

    Keeps the set of rules still consistent with feedback. Positive feedback
    narrows it to the rules the chosen card matched; negative feedback removes
    them, and if nothing is left the rule must have switched, so every rule
    except the refuted ones becomes a candidate again.
    """

    def reset(self, spec: dict[str, Any]) -> None:
        self.candidates: set[str] | None = None
        self.tested: set[str] = set()
        self.last_matched: set[str] = set()

    @staticmethod
    def _matched(given, option, attrs) -> set[str]:
        return {a for a in attrs if getattr(given, a) == getattr(option, a)}

    def respond(self, messages, observation) -> str:
        attrs = observation["attributes"]
        every = set(attrs)
        if self.candidates is None:
            self.candidates = set(every)
        feedback = observation["feedback"]
        if feedback == "correct":
            narrowed = self.candidates & self.last_matched
            self.candidates = narrowed or set(self.candidates)
        elif feedback == "incorrect":
            left = self.candidates - self.last_matched
            if not left:
                left = every - self.last_matched
                self.tested = set()
            self.candidates = left
        given, options = observation["given"], observation["options"]
        matched = [self._matched(given, o, attrs) for o in options]
        if not any(m & self.candidates for m in matched):
            self.candidates = set(every)
            self.tested = set()

        def rank(k: int) -> tuple:
            inter = matched[k] & self.candidates
            untested = len(inter - self.tested)
            return (not inter, len(inter), -untested, len(matched[k]), k)

        k = min(range(len(options)), key=rank)
        self.last_matched = matched[k]
        self.tested |= matched[k] & self.candidates
        return _tag(k + 1)


class RapmSolver:
    """MC: the single option passing the stored constraints. Gen: constructive search."""

    def reset(self, spec: dict[str, Any]) -> None:
        pass

    def respond(self, messages, observation) -> str:
        item = observation["item"]
        if observation["mode"] == "mc":
            for k, opt in enumerate(item.options, 1):
                if cell_satisfies(opt, item.target):
                    return _tag(k)
            return _tag(1)
        return _tag(generate_cell(item.target, random.Random(item.seed)))


class RemoteChatAgent:
    """OpenAI-style chat-completion client over plain HTTP."""

    def __init__(self, config: AgentConfig):
        self.config = config
        self.exchanges: list[dict[str, Any]] = []

    def reset(self, spec: dict[str, Any]) -> None:
        self.exchanges = []

    @staticmethod
    def _wire_message(m: dict[str, Any]) -> dict[str, Any]:
        if not m.get("image"):
            return {"role": m["role"], "content": m["content"]}
        data = base64.b64encode(m["image"].encode()).decode()
        return {
            "role": m["role"],
            "content": [
                {"type": "text", "text": m["content"]},
                {"type": "image_url", "image_url": {"url": f"data:image/svg+xml;base64,{data}"}},
            ],
        }

    def request_body(self, messages: list[dict[str, Any]]) -> dict[str, Any]:
        return {
            "model": self.config.model,
            "messages": [self._wire_message(m) for m in messages],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        }

    def respond(self, messages, observation) -> str:
        body = json.dumps(self.request_body(messages)).encode()
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        last_error = None
        for attempt in range(self.config.retries + 1):
            req = urllib.request.Request(self.config.endpoint, data=body, headers=headers)
            try:
                with urllib.request.urlopen(req, timeout=self.config.timeout) as resp:
                    payload = json.loads(resp.read().decode())
                text = payload["choices"][0]["message"]["content"] or ""
                self.exchanges.append({"request": json.loads(body), "response": payload})
                return text
            except urllib.error.HTTPError as exc:
                last_error = f"HTTP {exc.code}: {exc.reason}"
            except (urllib.error.URLError, TimeoutError, OSError, KeyError, ValueError) as exc:
                last_error = f"{type(exc).__name__}: {exc}"
            logger.warning("request attempt %d failed: %s", attempt + 1, last_error)
            if attempt < self.config.retries:
                time.sleep(min(2**attempt, 30) * 0.1)
        self.exchanges.append({"request": json.loads(body), "error": last_error})
        raise AgentError(last_error or "request failed")


def make_agent(config: AgentConfig) -> Agent:
    if config.kind == "remote-chat":
        return RemoteChatAgent(config)
    if config.kind == "scripted":
        return ScriptedAgent(config.replies)
    if config.kind == "oracle-swm-sweeper":
        return SwmSweeper()
    if config.kind == "oracle-wcst-eliminator":
        return WcstEliminator()
    return RapmSolver()
