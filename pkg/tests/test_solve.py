import random
from importlib.resources import files

import pytest

from corgi.logic import (Failure, KnowledgeBase, parse_program,
                         parse_term_text, replay, solve)

from kbgen import random_kb
from oracles import forward_chain, ground_queries

SAMPLE_KB = files("corgi.data").joinpath("kb/sample.pl").read_text()


@pytest.fixture()
def sample_kb():
    return parse_program(SAMPLE_KB)


def test_dry_on_tuesday_proof(sample_kb):
    res = solve(sample_kb, parse_term_text("status(i, dry, tuesday)"))
    assert res
    tree = res.tree
    # rule 2 of the program (0-based id 1), then the two facts
    assert tree.clause_id == 1
    assert [c.clause_id for c in tree.children] == [6, 7]
    assert tree.size() == 3
    leaves = [str(l.resolved_goal(res.bindings)) for l in tree.leaves()]
    assert leaves == ["isInside(i, home, tuesday)", "building(home)"]


def test_fact_query(sample_kb):
    assert solve(sample_kb, parse_term_text("isBefore(monday, tuesday)"))


def test_unprovable_is_exhausted(sample_kb):
    res = solve(sample_kb, parse_term_text("status(i, dry, wednesday)"))
    assert not res
    assert res.reason == "exhausted"


def test_unknown_predicate_fails_quietly(sample_kb):
    res = solve(sample_kb, parse_term_text("isAfter(wednesday, thursday)"))
    assert not res and res.reason == "exhausted"


def test_recursion_without_base_terminates(sample_kb):
    res = solve(sample_kb, parse_term_text("isEarlierThan(monday, X)"))
    assert not res


def test_depth_limit_reports_limit():
    kb = parse_program("loop(X) :- loop(X).\n")
    res = solve(kb, parse_term_text("loop(a)"))
    assert not res
    assert res.reason == "limit"


def test_limits_must_be_positive(sample_kb):
    with pytest.raises(ValueError):
        solve(sample_kb, parse_term_text("building(home)"), max_depth=0)


def test_t_indices_are_preorder(sample_kb):
    res = solve(sample_kb, parse_term_text("status(i, dry, tuesday)"))
    ts = [n.t for n in res.tree.nodes()]
    assert ts == list(range(res.tree.size()))


def test_proof_replays(sample_kb):
    res = solve(sample_kb, parse_term_text("status(i, dry, tuesday)"))
    assert replay(sample_kb, res.tree) is not None


def test_clause_order_respected():
    kb = parse_program("p(first).\np(second).\n")
    res = solve(kb, parse_term_text("p(X)"))
    assert str(res.tree.resolved_goal(res.bindings)) == "p(first)"


def test_arithmetic_in_rules():
    kb = parse_program(
        "total(X) :- part(A), part2(B), X = A + B.\npart(2).\npart2(3).\n")
    res = solve(kb, parse_term_text("total(X)"))
    assert res
    assert str(res.tree.resolved_goal(res.bindings)) == "total(5)"


def test_every_returned_proof_replays():
    rng = random.Random(515)
    checked = 0
    for _ in range(15):
        kb = random_kb(rng)
        for query in ground_queries(kb):
            res = solve(kb, query, max_depth=30)
            if res:
                assert replay(kb, res.tree) is not None
                checked += 1
    assert checked > 0


def test_forward_oracle_agreement_sample():
    """Small-scale version of the acceptance criterion, for quick feedback."""
    rng = random.Random(20240817)
    for _ in range(25):
        kb = random_kb(rng)
        truth = forward_chain(kb)
        for query in ground_queries(kb):
            res = solve(kb, query, max_depth=30)
            assert isinstance(res, Failure) or res, "solve returned junk"
            assert bool(res) == (str(query) in truth), (
                f"disagreement on {query} over KB:\n{kb.text()}")
