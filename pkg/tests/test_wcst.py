from __future__ import annotations

import random
import xml.etree.ElementTree as ET
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from neurocog import wcst
from neurocog.wcst import Card, TurnRecord, WcstConfig

EASY = ("number", "color", "shape")


def _trial(difficulty="easy", ambiguity=None, seed=0, **kw):
    amb = ambiguity or ("off" if difficulty == "easy" else "first")
    return wcst.new_trial(WcstConfig(difficulty=difficulty, ambiguity=amb, seed=seed, **kw))


def test_level_parameters():
    easy, hard = WcstConfig(), WcstConfig("hard", "first")
    assert (easy.rule_instances, easy.guess_cap, easy.consecutive_required) == (6, 64, 5)
    assert (hard.rule_instances, hard.guess_cap) == (8, 96)
    assert set(easy.rules) == {"color", "shape", "number"}
    assert set(hard.rules) == {"color", "shape", "number", "background"}
    with pytest.raises(ValueError):
        WcstConfig("easy", "first")


@pytest.mark.parametrize("difficulty, n, per", [("easy", 6, 2), ("hard", 8, 2)])
def test_schedule_multiset_and_no_adjacent_repeat(difficulty, n, per):
    for seed in range(50):
        t = _trial(difficulty, seed=seed)
        assert len(t.schedule) == n
        assert set(Counter(t.schedule).values()) == {per}
        assert all(a != b for a, b in zip(t.schedule, t.schedule[1:]))


def test_same_seed_same_schedule_and_round():
    a, b = _trial("hard", seed=3), _trial("hard", seed=3)
    assert a.schedule == b.schedule and a.current == b.current


def test_background_only_on_hard():
    assert _trial().current.given.background is None
    assert _trial("hard").current.given.background in wcst.VALUES["background"]


def test_card_descriptions():
    assert Card(2, "red", "triangle").describe() == "two red triangle"
    assert Card(4, "yellow", "square", "purple").describe() == "four yellow square on purple background"
    rnd = wcst.Round(Card(2, "red", "triangle"),
                     [Card(2, "green", "triangle"), Card(4, "yellow", "square"),
                      Card(3, "blue", "star"), Card(1, "red", "circle")], 4, "color", 0, False)
    assert wcst.describe_round(rnd).splitlines() == [
        "Given: two red triangle", "Options:", "1. two green triangle", "2. four yellow square",
        "3. three blue star", "4. one red circle",
    ]


def _audit_round(rnd, attrs, ambiguous_expected):
    cards = [rnd.given] + list(rnd.options)
    assert len(set(cards)) == 5
    matches = [wcst.matched_attributes(rnd.given, o, attrs) for o in rnd.options]
    on_rule = [k for k, m in enumerate(matches, 1) if rnd.rule in m]
    assert on_rule == [rnd.correct]
    correct_other = set(matches[rnd.correct - 1]) - {rnd.rule}
    assert bool(correct_other) == ambiguous_expected
    for k, m in enumerate(matches, 1):
        if k != rnd.correct:
            assert len(m) <= 1


@pytest.mark.parametrize("difficulty, ambiguity", [("easy", "off"), ("hard", "off"),
                                                   ("hard", "first"), ("hard", "rest")])
def test_dealt_rounds_audit(difficulty, ambiguity):
    rng = random.Random(5)
    rounds = 0
    for seed in range(120):
        t = _trial(difficulty, ambiguity, seed)
        attrs = t.config.attributes
        while not t.done and rounds < 10_000:
            rnd = t.current
            first = t.rounds_in_block == 1
            expect = (ambiguity == "first" and first) or (ambiguity == "rest" and not first)
            _audit_round(rnd, attrs, expect)
            rounds += 1
            # mostly correct so blocks advance and every round position is visited
            pick = rnd.correct if rng.random() < 0.8 else rng.randint(1, 4)
            wcst.apply_choice(t, pick)
    assert rounds > 1000


def test_off_mode_correct_option_shares_only_the_rule():
    t = _trial()
    for _ in range(30):
        rnd = t.current
        m = wcst.matched_attributes(rnd.given, rnd.options[rnd.correct - 1], EASY)
        assert m == (rnd.rule,)
        wcst.apply_choice(t, rnd.correct)
        if t.done:
            break


def test_feedback_strings_are_exact():
    t = _trial()
    rnd = t.current
    wrong = next(k for k in range(1, 5) if k != rnd.correct)
    assert wcst.apply_choice(t, wrong) == "Incorrect. Please try again."
    assert wcst.apply_choice(t, t.current.correct) == "Correct!"


def test_wrong_answer_re_presents_round():
    t = _trial(seed=2)
    rnd = t.current
    wrong = next(k for k in range(1, 5) if k != rnd.correct)
    wcst.apply_choice(t, wrong)
    assert t.current is rnd


def test_silent_switch_after_five_correct():
    t = _trial(seed=1)
    first_rule = t.active_rule
    for _ in range(5):
        assert t.block_index == 0
        wcst.apply_choice(t, t.current.correct)
    assert t.block_index == 1 and t.current.rule == t.schedule[1] != first_rule
    assert t.consecutive_correct == 0 and t.eliminated == set()


def test_incorrect_choice_eliminates_whole_matched_set():
    t = _trial("hard", "off", seed=0)
    t.current = wcst.Round(
        Card(2, "red", "triangle", "white"),
        [Card(2, "blue", "triangle", "cyan"), Card(1, "red", "square", "orange"),
         Card(3, "green", "star", "white"), Card(4, "yellow", "circle", "purple")],
        2, "color", 0, False,
    )
    t.schedule[0] = "color"
    wcst.apply_choice(t, 1)
    assert t.eliminated == {"number", "shape"}
    assert t.turn_log[-1].matched == ("number", "shape")


def test_invalid_turn_consumes_cap_only():
    t = _trial()
    wcst.apply_choice(t, None)
    assert t.turn_count == 1 and t.block_guesses[0] == 0
    assert t.turn_log[-1].invalid and t.consecutive_correct == 0


@given(st.integers(0, 10**6), st.sampled_from([("easy", "off"), ("hard", "first"), ("hard", "rest")]))
def test_random_play_invariants(seed, level):
    t = _trial(level[0], level[1], seed)
    rng = random.Random(seed)
    while not t.done:
        assert 0 <= t.consecutive_correct < t.config.consecutive_required
        choice = rng.choice([None, 1, 2, 3, 4, t.current.correct, t.current.correct])
        wcst.apply_choice(t, choice)
    assert t.turn_count <= t.config.guess_cap
    s = wcst.score(t)
    assert 0 <= s.fms <= 1 and 0 <= s.pr <= 1 and 0 <= s.s_wcst <= 1
    assert s.completed_rules == t.completed_rules
    for g in (s.block_guesses[k] for k in wcst.completed_blocks(t.turn_log, 5)):
        assert g >= 5


# -- scoring fixtures --------------------------------------------------------

G = Card(1, "red", "circle")


def _rec(correct, matched=("color",), block=0, eliminated=(), invalid=False):
    return TurnRecord(G, [G] * 4, None if invalid else 1, tuple(matched),
                      None if invalid else correct, block, invalid, tuple(eliminated))


def test_s_r_fixtures():
    assert wcst.s_wcst_from_guesses([5], 1) == 1.0
    assert wcst.s_wcst_from_guesses([7], 1) == pytest.approx(5 / 7)
    assert wcst.s_wcst_from_guesses([9], 1) == pytest.approx(5 / 9)
    assert round(5 / 7, 3) == 0.714 and round(5 / 9, 3) == 0.556


def test_s_wcst_from_logs():
    log = [_rec(False), _rec(False)] + [_rec(True)] * 5
    assert wcst.compute_s_wcst(log, 1) == pytest.approx(5 / 7)
    log = [_rec(False), _rec(False), _rec(True), _rec(False)] + [_rec(True)] * 5
    assert wcst.compute_s_wcst(log, 1) == pytest.approx(5 / 9)
    # an unfinished second instance contributes nothing
    log = [_rec(True)] * 5 + [_rec(False, block=1)] * 3
    assert wcst.compute_s_wcst(log, 2) == pytest.approx(0.5)


def test_pr_fixtures():
    assert wcst.compute_pr([_rec(True)] * 5) == 0.0
    log = [_rec(False, ("shape",)), _rec(False, ("shape",), eliminated=("shape",))]
    assert wcst.compute_pr(log) == 1.0
    # turns before any elimination stay out of the denominator
    log = [_rec(True), _rec(False, ("shape",)), _rec(True, ("color",), eliminated=("shape",))]
    assert wcst.compute_pr(log) == 0.0
    # a partly uneliminated matched set is not perseverative
    log = [_rec(False, ("shape", "color"), eliminated=("shape",))]
    assert wcst.compute_pr(log) == 0.0


def test_fms_fixtures():
    assert wcst.compute_fms([_rec(True)] * 5 + [_rec(True, block=1)] * 5) == 0.0
    pattern = "CCCXCCCCC"
    log = [_rec(ch == "C") for ch in pattern]
    assert wcst.compute_fms(log) == pytest.approx(1 / 6)
    assert wcst.compute_fms([_rec(False)] * 4) == 0.0


def _relabel(log, perm):
    def card(c):
        return Card(c.number, perm.get(c.color, c.color), c.shape, c.background)

    return [TurnRecord(card(r.given), [card(o) for o in r.options], r.choice, r.matched, r.correct,
                       r.block, r.invalid, r.eliminated) for r in log]


@given(st.integers(0, 10**6), st.permutations(["red", "green", "blue", "yellow"]))
def test_pr_fms_invariant_under_value_relabeling(seed, colors):
    t = _trial(seed=seed)
    rng = random.Random(seed)
    while not t.done:
        wcst.apply_choice(t, rng.choice([1, 2, 3, 4, t.current.correct]))
    perm = dict(zip(["red", "green", "blue", "yellow"], colors))
    log2 = _relabel(t.turn_log, perm)
    assert wcst.compute_pr(log2) == wcst.compute_pr(t.turn_log)
    assert wcst.compute_fms(log2) == wcst.compute_fms(t.turn_log)


def test_first_rule_trials_is_first_completed_block():
    log = [_rec(False), _rec(True)] + [_rec(True)] * 4 + [_rec(True, block=1)] * 5
    s = wcst.score_log(log, WcstConfig())
    assert s.first_rule_trials == 6 and s.completed_rules == 2


def test_turn_record_roundtrip():
    t = _trial("hard")
    wcst.apply_choice(t, 1)
    rec = t.turn_log[0]
    assert TurnRecord.from_dict(rec.to_dict()) == rec


# -- rendering ---------------------------------------------------------------


def test_notes_lines():
    t = _trial()
    assert wcst.render_notes(t) == "Recent notes:"
    for _ in range(3):
        wcst.apply_choice(t, t.current.correct)
    lines = wcst.render_notes(t).splitlines()
    assert len(lines) == 4
    rule_label = wcst.ATTRIBUTE_LABELS[t.schedule[0]]
    assert lines[1] == f"- Turn -1: matching {rule_label} -- Correct."


def test_notes_phrase_color():
    assert wcst.matched_phrase(("color",)) == "symbol color"
    assert wcst.matched_phrase(("number", "color")) == "number of symbols and symbol color"


def test_notes_window_is_six():
    t = _trial(seed=4)
    for _ in range(9):
        wcst.apply_choice(t, t.current.correct)
    assert len(wcst.render_notes(t).splitlines()) == 1 + 6


def test_svg_has_five_card_groups():
    t = _trial("hard")
    root = ET.fromstring(wcst.render_svg(t.current))
    groups = [e for e in root.iter() if e.get("class") == "card"]
    assert len(groups) == 5
