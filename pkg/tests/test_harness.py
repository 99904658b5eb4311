from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from hypothesis import given
from hypothesis import strategies as st

from neurocog import swm, wcst
from neurocog.harness import (
    AgentConfig,
    AgentError,
    RapmEnv,
    RemoteChatAgent,
    ScriptedAgent,
    SwmEnv,
    SwmSweeper,
    Transcript,
    WcstEliminator,
    WcstEnv,
    build_system_prompt,
    check_alternation,
    make_agent,
    make_env,
    parse_answer,
    read_transcript,
    replay,
    run_session,
    write_transcript,
)
from neurocog.harness.session import ReplayMismatch
from neurocog.rapm import generate_item

# -- prompts -----------------------------------------------------------------


def test_swm_prompt_box_range():
    assert "a number from 1-8" in build_system_prompt("swm", difficulty="easy")
    assert "a number from 1-12" in build_system_prompt("swm", difficulty="hard")


def test_wcst_prompt_answer_range_and_background_line():
    easy = build_system_prompt("wcst", difficulty="easy")
    hard = build_system_prompt("wcst", difficulty="hard")
    assert "a number between 1-4" in easy
    assert "Background color" not in easy and "Background color" in hard


def test_rapm_hint_block_is_gated():
    assert "Possible dimensions" not in build_system_prompt("rapm-text-mc", hint=False)
    assert "Possible dimensions" in build_system_prompt("rapm-text-mc", hint=True)


def test_think_budget_substitution():
    assert "30000" in build_system_prompt("rapm-text-gen")
    assert "60000" in build_system_prompt("rapm-text-gen", think_budget=60000)
    assert "4000" in build_system_prompt("wcst")
    assert "4000" not in build_system_prompt("wcst", cot=False)


def test_unknown_task_prompt():
    with pytest.raises(ValueError):
        build_system_prompt("stroop")


# -- parsing -----------------------------------------------------------------


def test_parse_examples():
    assert parse_answer("I pick <answer>2</answer>", "int", 1, 4).value == 2
    assert parse_answer("so <answer>(10, 4)</answer>", "coordinate").value == (10, 4)
    assert not parse_answer("The answer is 3", "int", 1, 4).valid
    assert not parse_answer("<answer>5</answer>", "int", 1, 4).valid
    assert not parse_answer("<answer>(1, -2)</answer>", "coordinate").valid
    assert not parse_answer("<answer>  </answer>", "string").valid
    assert parse_answer("<answer>1</answer> then <answer>3</answer>", "int", 1, 4).value == 3
    assert not parse_answer("<answer>3", "int", 1, 4).valid
    assert not parse_answer(None, "int").valid


_noise = st.text(alphabet=st.characters(blacklist_characters="<>"), max_size=30)


@given(st.text(max_size=80))
def test_parse_is_deterministic(raw):
    for kind in ("int", "coordinate", "string"):
        assert parse_answer(raw, kind) == parse_answer(raw, kind)


@given(st.lists(st.tuples(_noise, st.integers(0, 99)), min_size=1, max_size=5), _noise)
def test_last_tag_wins(chunks, tail):
    raw = "".join(f"{n}<answer>{v}</answer>" for n, v in chunks) + tail
    assert parse_answer(raw, "int").value == chunks[-1][1]


# -- oracles -----------------------------------------------------------------


def _run(env, agent):
    return run_session(env, agent)


@pytest.mark.parametrize("difficulty", ["easy", "hard"])
@pytest.mark.parametrize("modality", ["text", "image"])
def test_swm_sweeper_never_errs(difficulty, modality):
    for seed in range(15):
        env = SwmEnv(swm.SwmConfig(difficulty=difficulty, modality=modality, seed=seed))
        tr = _run(env, SwmSweeper())
        assert all(t.valid for t in tr.turns)
        assert tr.score["n_err"] == 0 and tr.score["s_swm"] == 1.0


def test_swm_sweeper_easy_finishes_within_36():
    for seed in range(30):
        tr = _run(SwmEnv(swm.SwmConfig(seed=seed)), SwmSweeper())
        assert tr.score["tokens_found"] == 8 and len(tr.turns) <= 36


@pytest.mark.parametrize("difficulty, amb, bound", [("easy", "off", 7), ("hard", "first", 9)])
def test_wcst_eliminator_bounds(difficulty, amb, bound):
    for seed in range(20):
        env = WcstEnv(wcst.WcstConfig(difficulty=difficulty, ambiguity=amb, seed=seed))
        tr = _run(env, WcstEliminator())
        assert all(t.valid for t in tr.turns)
        assert tr.score["completed_rules"] == env.trial.config.rule_instances
        assert max(tr.score["block_guesses"]) <= bound


@pytest.mark.parametrize("mode", ["mc", "gen"])
def test_rapm_solver_is_always_right(mode):
    for seed in range(20):
        tr = _run(RapmEnv(generate_item(seed), mode), make_agent(AgentConfig("oracle-rapm-solver")))
        assert tr.score["correct"] and not tr.score["invalid"]


def test_rapm_unparseable_answer_is_incorrect():
    tr = _run(RapmEnv(generate_item(0), "mc"), ScriptedAgent(["I think it is 2"]))
    assert tr.score == {"accuracy": 0.0, "correct": False, "invalid": True}


# -- sessions ----------------------------------------------------------------


def test_invalid_only_agent_on_swm_easy():
    tr = _run(SwmEnv(swm.SwmConfig(seed=3)), ScriptedAgent([]))
    assert len(tr.turns) == 64
    assert tr.score["s_swm"] == 0.0 and tr.score["n_valid"] == 0


def test_messages_alternate_after_system():
    tr = _run(WcstEnv(wcst.WcstConfig(seed=2, notes=True)), WcstEliminator())
    assert check_alternation(tr)
    assert tr.messages[0]["role"] == "system"
    assert [m["role"] for m in tr.messages[1:3]] == ["user", "assistant"]


def test_scripted_transcripts_are_byte_identical(tmp_path):
    replies = ["<answer>3</answer>", "nope", "<answer>1</answer>", "<answer>9</answer>"] * 5
    paths = []
    for k in range(2):
        env = SwmEnv(swm.SwmConfig(seed=11, notes=True))
        p = tmp_path / f"t{k}.jsonl"
        run_session(env, ScriptedAgent(replies), trial_id="x", path=p)
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_transcript_roundtrip_and_schema(tmp_path):
    tr = _run(WcstEnv(wcst.WcstConfig("hard", "rest", seed=1)), WcstEliminator())
    p = tmp_path / "t.jsonl"
    write_transcript(tr, p)
    head = json.loads(p.read_text().splitlines()[0])
    assert head["schema_version"] == 1 and head["type"] == "header"
    back = read_transcript(p)
    assert back.score == json.loads(json.dumps(tr.score))
    assert len(back.turns) == len(tr.turns) and back.messages == tr.messages


def test_image_modality_messages_carry_svg():
    tr = _run(SwmEnv(swm.SwmConfig(modality="image", seed=0)), SwmSweeper())
    assert tr.messages[1]["image"].startswith("<svg")


def _spec_strategy():
    swm_spec = st.builds(lambda d, m, n, s: {"task": "swm", "difficulty": d, "modality": m, "notes": n, "seed": s},
                         st.sampled_from(["easy", "hard"]), st.sampled_from(["text", "image"]),
                         st.booleans(), st.integers(0, 10**6))
    wcst_spec = st.builds(lambda lv, n, s: {"task": "wcst", "difficulty": lv[0], "ambiguity": lv[1],
                                             "notes": n, "seed": s},
                          st.sampled_from([("easy", "off"), ("hard", "off"), ("hard", "first"), ("hard", "rest")]),
                          st.booleans(), st.integers(0, 10**6))
    return st.one_of(swm_spec, wcst_spec)


_answer = st.one_of(
    st.integers(0, 13).map(lambda v: f"<answer>{v}</answer>"),
    st.tuples(st.integers(0, 12), st.integers(0, 8)).map(lambda c: f"<answer>({c[0]}, {c[1]})</answer>"),
    st.just("no idea"),
)


@given(_spec_strategy(), st.lists(_answer, max_size=40))
def test_replay_reproduces_score(spec, replies):
    tr = run_session(make_env(spec), ScriptedAgent(replies))
    stored = Transcript.from_records(json.loads(json.dumps(tr.records())))
    assert replay(stored) == json.loads(json.dumps(tr.score))


def test_replay_detects_edited_outcome():
    tr = _run(SwmEnv(swm.SwmConfig(seed=5)), SwmSweeper())
    tr.turns[2].outcome = "illegal"
    with pytest.raises(ReplayMismatch):
        replay(tr)


def test_replay_detects_edited_score():
    tr = _run(SwmEnv(swm.SwmConfig(seed=5)), SwmSweeper())
    tr.score = dict(tr.score, s_swm=0.5)
    with pytest.raises(ReplayMismatch):
        replay(tr)


# -- agent config and remote agent -------------------------------------------


def test_agent_config_defaults_and_validation():
    c = AgentConfig("remote-chat", endpoint="http://x", model="m")
    assert c.temperature == 0.0 and c.max_tokens == 8192
    with pytest.raises(ValueError):
        AgentConfig("remote-chat", model="m")
    with pytest.raises(ValueError):
        AgentConfig("telepathy")


class _Stub(BaseHTTPRequestHandler):
    bodies: list = []
    headers_seen: list = []
    fail_first = 0

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).bodies.append(body)
        type(self).headers_seen.append(dict(self.headers))
        if type(self).fail_first > 0:
            type(self).fail_first -= 1
            self.send_response(503)
            self.end_headers()
            return
        payload = json.dumps({"choices": [{"message": {"content": "<answer>1</answer>"}}]}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    _Stub.bodies, _Stub.headers_seen, _Stub.fail_first = [], [], 0
    server = HTTPServer(("127.0.0.1", 0), _Stub)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}/v1/chat/completions"
    server.shutdown()


def test_remote_agent_request_shape(stub_server, monkeypatch):
    monkeypatch.setenv("NEUROCOG_API_KEY", "k123")
    agent = RemoteChatAgent(AgentConfig("remote-chat", endpoint=stub_server, model="m1", retries=0))
    env = WcstEnv(wcst.WcstConfig(seed=0))
    tr = run_session(env, agent)
    body = _Stub.bodies[0]
    assert body["model"] == "m1" and body["temperature"] == 0.0 and body["max_tokens"] == 8192
    assert [m["role"] for m in body["messages"]] == ["system", "user"]
    assert _Stub.headers_seen[0]["Authorization"] == "Bearer k123"
    # every later request resends the whole conversation
    assert len(_Stub.bodies[-1]["messages"]) == 2 * len(tr.turns)
    assert len(agent.exchanges) == len(tr.turns)


def test_remote_agent_attaches_images(stub_server):
    agent = RemoteChatAgent(AgentConfig("remote-chat", endpoint=stub_server, model="m", retries=0))
    env = SwmEnv(swm.SwmConfig(modality="image", seed=0))
    agent.respond([{"role": "user", "content": "hi", "image": env.first_prompt().image}], {})
    part = _Stub.bodies[0]["messages"][0]["content"][1]
    assert part["image_url"]["url"].startswith("data:image/svg+xml;base64,")


def test_remote_agent_retries_then_recovers(stub_server):
    _Stub.fail_first = 2
    agent = RemoteChatAgent(AgentConfig("remote-chat", endpoint=stub_server, model="m", retries=2))
    assert agent.respond([{"role": "user", "content": "x"}], {}) == "<answer>1</answer>"
    assert len(_Stub.bodies) == 3


def test_remote_failure_becomes_invalid_turn(stub_server):
    _Stub.fail_first = 10**6
    agent = RemoteChatAgent(AgentConfig("remote-chat", endpoint=stub_server, model="m", retries=1))
    with pytest.raises(AgentError):
        agent.respond([{"role": "user", "content": "x"}], {})
    env = WcstEnv(wcst.WcstConfig(seed=0))
    turn = env.trial.turn_count

    class OneShot:
        def reset(self, spec):
            pass

        def respond(self, messages, observation):
            if env.trial.turn_count == turn:
                return agent.respond(messages, observation)
            return "<answer>1</answer>"

    tr = run_session(env, OneShot())
    first = tr.turns[0]
    assert first.raw is None and not first.valid and "HTTP 503" in first.agent_error
