"""Prompting, parsing, environments, agents and the session loop."""

from .agents import (
    AGENT_KINDS,
    AgentConfig,
    AgentError,
    RapmSolver,
    RemoteChatAgent,
    ScriptedAgent,
    SwmSweeper,
    WcstEliminator,
    make_agent,
)
from .envs import Prompt, RapmEnv, StepResult, SwmEnv, WcstEnv, make_env
from .parsing import ParseResult, parse_answer
from .prompts import build_system_prompt
from .session import (
    ReplayMismatch,
    Transcript,
    TranscriptError,
    check_alternation,
    read_transcript,
    replay,
    run_session,
    write_transcript,
)

__all__ = [
    "AGENT_KINDS", "AgentConfig", "AgentError", "RapmSolver", "RemoteChatAgent", "ScriptedAgent",
    "SwmSweeper", "WcstEliminator", "make_agent", "Prompt", "RapmEnv", "StepResult", "SwmEnv",
    "WcstEnv", "make_env", "ParseResult", "parse_answer", "build_system_prompt", "ReplayMismatch",
    "Transcript", "TranscriptError", "check_alternation", "read_transcript", "replay",
    "run_session", "write_transcript",
]
