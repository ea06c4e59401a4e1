from importlib.resources import files

import pytest

from corgi.dialog import (NotAwaitingAnswer, ParseFailure, export_transcript,
                          start_session, user_answer)
from corgi.logic import parse_program, parse_term_text
from corgi.softprove import SoftProveConfig

MAIN = files("corgi.data").joinpath("kb/main.pl").read_text()
DEMO = files("corgi.data").joinpath("kb/commute_demo.pl").read_text()

UMBRELLA_COMMAND = ("If it's going to rain in the afternoon then remind me to "
                  "bring an umbrella because I want to remain dry.")
SNOW_COMMAND = ("If it snows tonight then wake me up early because I want "
                "to get to work on time.")

SUCCESS_TURNS = ["If I have my umbrella.",
                 "If you remind me to bring an umbrella."]
FAILURE_TURNS = ["If I have my umbrella.", "If it's in my office.",
                 "If it's in the closet.", "If it's in my car."]

EXPECTED_SUCCESS_TRANSCRIPT = [
    UMBRELLA_COMMAND,
    "How do I know if ``I remain dry''?",
    "If I have my umbrella.",
    "How do I know if ``I have my umbrella''?",
    "If you remind me to bring an umbrella.",
    "Okay, I will perform ``remind me to bring an umbrella'' in order to "
    "achieve ``I remain dry''.",
]


def load_types(kb, tmp_path):
    tf = tmp_path / "types.tsv"
    tf.write_text(files("corgi.data").joinpath("types.tsv").read_text())
    kb.load_types(tf)
    return kb


@pytest.fixture()
def main_kb(tmp_path):
    return load_types(parse_program(MAIN), tmp_path)


@pytest.fixture()
def demo_kb(tmp_path):
    return load_types(parse_program(DEMO), tmp_path)


def test_first_question_matches_expected_template(main_kb):
    session, action = start_session(main_kb, UMBRELLA_COMMAND)
    assert action.type == "ask"
    assert action.text == "How do I know if ``I remain dry''?"
    assert session.status == "awaiting_user"


def test_success_dialog_transcript(main_kb):
    session, action = start_session(main_kb, UMBRELLA_COMMAND)
    for turn in SUCCESS_TURNS:
        action = user_answer(session, turn)
    assert action.type == "succeed"
    assert session.status == "succeeded"
    lines = [text for _, text in session.transcript]
    assert lines == EXPECTED_SUCCESS_TRANSCRIPT
    # two rules learned and kept
    assert len(session.pending_rule_ids) == 2
    assert session.contributed_rules == [
        "have(i, umbrella) :- remind(me, bring_umbrella).",
        "remain(i, dry) :- have(i, umbrella).",
    ]


def test_success_proof_covers_state_and_action(main_kb):
    session, action = start_session(main_kb, UMBRELLA_COMMAND)
    for turn in SUCCESS_TURNS:
        action = user_answer(session, turn)
    assert action.proof is not None
    rendered = str(action.proof)
    assert "rain" in rendered


def test_failure_dialog_hits_loop_bound(main_kb):
    session, action = start_session(main_kb, UMBRELLA_COMMAND)
    asks = 1
    for turn in FAILURE_TURNS:
        action = user_answer(session, turn)
        if action.type == "ask":
            asks += 1
    assert action.type == "fail"
    assert action.reason == "loop_bound"
    assert session.status == "failed"
    # n feedback answers plus the initial question
    assert asks == session.n + 1


def test_transcript_export_layout(main_kb):
    session, _ = start_session(main_kb, UMBRELLA_COMMAND)
    user_answer(session, SUCCESS_TURNS[0])
    text = export_transcript(session)
    lines = text.splitlines()
    assert lines[0] == UMBRELLA_COMMAND
    assert lines[1].startswith("    ")


def test_demo_goal_proves_without_feedback(demo_kb):
    session, action = start_session(demo_kb, SNOW_COMMAND)
    assert action.type == "succeed"
    assert session.i == 0
    assert [p.rendered for p in session.presumptions] == [
        "Precipitation >= 2", "calendarEntry(i, work, 9)"]
    assert [p.kind for p in session.presumptions] == [
        "state_constraint", "user_fact"]


def test_no_feedback_mode_fails_immediately(main_kb):
    session, action = start_session(main_kb, UMBRELLA_COMMAND, n=0)
    assert action.type == "fail"
    assert action.reason == "no_feedback"
    ask_count = sum(1 for s, t in session.transcript
                    if s == "corgi" and t.startswith("How do I know"))
    assert ask_count == 0


def test_parse_failure_no_session(main_kb):
    with pytest.raises(ParseFailure):
        start_session(main_kb, "if a then b")


def test_unparseable_answer_gets_clarification_once(main_kb):
    session, _ = start_session(main_kb, UMBRELLA_COMMAND)
    before = session.i
    action = user_answer(session, "the of and")
    assert action.type == "ask"
    assert "did not understand" in action.text
    assert session.i == before  # clarification is free


def test_answer_guard_after_success(main_kb):
    session, _ = start_session(main_kb, UMBRELLA_COMMAND)
    for turn in SUCCESS_TURNS:
        user_answer(session, turn)
    with pytest.raises(NotAwaitingAnswer):
        user_answer(session, "another answer")


def test_rollback_restores_clause_list(main_kb):
    session, _ = start_session(main_kb, UMBRELLA_COMMAND)
    snapshot = session.kb_view.text()
    for turn in FAILURE_TURNS:
        user_answer(session, turn)
    assert session.kb_view.text() == snapshot
    assert session.pending_rule_ids == []


def test_base_kb_never_mutated(main_kb):
    before = main_kb.text()
    session, _ = start_session(main_kb, UMBRELLA_COMMAND)
    for turn in SUCCESS_TURNS:
        user_answer(session, turn)
    assert main_kb.text() == before


def test_session_isolation(main_kb):
    a, _ = start_session(main_kb, UMBRELLA_COMMAND)
    b, _ = start_session(main_kb, UMBRELLA_COMMAND)
    for turn in SUCCESS_TURNS:
        user_answer(a, turn)
    assert a.status == "succeeded"
    # b's view has none of a's rules
    b_texts = [c.text() for c in b.kb_view.local_clauses()]
    assert "remain(i, dry) :- have(i, umbrella)." not in b_texts
    # and b can still walk its own path
    for turn in SUCCESS_TURNS:
        action = user_answer(b, turn)
    assert action.type == "succeed"


def test_action_not_covered_fails_and_restores(main_kb):
    # the goal predicate is known and provable, but no proof node can match
    # the commanded action, so the engine refuses and restores the overlay
    cmd = ("If it's going to rain in the afternoon then dance for me "
           "because you remind me to bring an umbrella.")
    session, action = start_session(main_kb, cmd)
    assert action.type == "fail"
    assert action.reason == "action_not_covered"
    assert len(session.kb_view.local_clauses()) == 2  # just the context facts


def test_success_presumptions_empty_when_leaves_all_match(main_kb):
    session, action = start_session(main_kb, UMBRELLA_COMMAND)
    for turn in SUCCESS_TURNS:
        action = user_answer(session, turn)
    assert action.type == "succeed"
    # the only context fact the proof consumed is the state itself
    assert session.presumptions == []


def test_succeed_result_replays(main_kb):
    from corgi.softprove import OracleGuide, soft_replay
    session, _ = start_session(main_kb, UMBRELLA_COMMAND)
    for turn in SUCCESS_TURNS:
        user_answer(session, turn)
    assert soft_replay(session.kb_view, session.result, OracleGuide())


def test_two_state_constraints_both_extracted():
    # two comparisons hang off the state-matching node's variable: both
    # come back as state constraints, in visit order
    from corgi.dialog import extract_presumptions
    from corgi.logic import Atom, Variable, parse_program, parse_term_text, solve
    from corgi.nlparse import LogicalForm
    from corgi.softprove import OneHotEmbeddings
    kb = parse_program(
        "ready(Person1) :- temperature(Person1, Temp), Temp >= 2, Temp < 9.\n"
        "% @user-state\ntemperature(i, 5).\n")
    res = solve(kb, parse_term_text("ready(i)"))
    assert res
    S = LogicalForm(predicate="temperature",
                    args=[Atom("i"), Variable("Reading")],
                    source_text="the temperature is mild")
    out = extract_presumptions(res.tree, res.bindings, S, S, kb,
                               OneHotEmbeddings(), 0.9)
    constraints = [p for p in out if p.kind == "state_constraint"]
    assert [p.rendered for p in constraints] == ["Temp >= 2", "Temp < 9"]
    assert [p.node_t for p in constraints] == [2, 3]


def test_succeed_action_serializes(main_kb):
    session, _ = start_session(main_kb, UMBRELLA_COMMAND)
    for turn in SUCCESS_TURNS:
        action = user_answer(session, turn)
    record = action.to_record()
    assert record["type"] == "succeed"
    assert "proof" in record and "presumptions" in record
    assert record["proof"]["t"] == 0
