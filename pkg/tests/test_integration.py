"""Cross-module flows: learned guidance driving dialogs end to end."""

from importlib.resources import files

import numpy as np
import pytest

from corgi.dialog import start_session, user_answer
from corgi.logic import parse_program, parse_term_text, solve
from corgi.model import ModelDims, NeuralGuide, TrainConfig, train
from corgi.softprove import (Guide, MatrixEmbeddings, SoftProveConfig,
                             soft_prove)
from corgi.traces import build_corpus

MAIN = files("corgi.data").joinpath("kb/main.pl").read_text()

UMBRELLA_COMMAND = ("If it's going to rain in the afternoon then remind me to "
                  "bring an umbrella because I want to remain dry.")
SUCCESS_TURNS = ["If I have my umbrella.",
                 "If you remind me to bring an umbrella."]


@pytest.fixture(scope="module")
def main_kb():
    kb = parse_program(MAIN)
    text = files("corgi.data").joinpath("types.tsv").read_text()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            noun, _, tag = line.partition("\t")
            kb.types_dict[noun.strip()] = tag.strip()
    return kb


@pytest.fixture(scope="module")
def trained_guide_factory(main_kb):
    corpus = build_corpus(main_kb, 40, seed=3)
    dims = ModelDims(m1=32, m2=32, char_hidden=16, enc_out=16, hidden=48,
                     head_hidden=48)
    params, _ = train(corpus, TrainConfig(learning_rate=0.3, epochs=150,
                                          batch_size=8, seed=1),
                      n_rules=len(main_kb), dims=dims)
    return lambda kb: NeuralGuide(params, kb)


def test_soft_mode_dialog_succeeds(main_kb, trained_guide_factory):
    """The learned guide carries the scripted dialog, including rules and
    symbols it never saw during training."""
    session, action = start_session(main_kb, UMBRELLA_COMMAND,
                                    guide_factory=trained_guide_factory)
    for turn in SUCCESS_TURNS:
        action = user_answer(session, turn)
    assert action.type == "succeed"
    assert session.status == "succeeded"


def test_soft_mode_failure_still_rolls_back(main_kb, trained_guide_factory):
    session, _ = start_session(main_kb, UMBRELLA_COMMAND,
                               guide_factory=trained_guide_factory)
    snapshot = session.kb_view.text()
    for turn in ["If I have my umbrella.", "If it's in my office.",
                 "If it's in the closet.", "If it's in my car."]:
        action = user_answer(session, turn)
    assert action.type == "fail"
    assert session.kb_view.text() == snapshot


def test_paper_scale_kb_stays_fast():
    """A 228-clause program (the original collection's size) supports query
    synthesis, proving and trace serialization without blowing up."""
    import random
    import time
    from kbgen import random_kb
    from corgi.logic import KnowledgeBase
    from corgi.traces import build_corpus

    rng = random.Random(8)
    kb = KnowledgeBase()
    while len(kb) < 228:
        part = random_kb(rng, max_clauses=12)
        for clause in part.clauses:
            head = _rename_pred(clause.head, len(kb))
            body = [_rename_pred(g, len(kb)) for g in clause.body]
            kb.add_clause(head, body)
    assert len(kb) >= 228
    started = time.monotonic()
    corpus = build_corpus(kb, 50, seed=5, max_depth=25)
    elapsed = time.monotonic() - started
    assert len(corpus.traces) == 50
    assert elapsed < 30.0, f"{elapsed:.1f}s for 50 traces over {len(kb)} clauses"


def _rename_pred(term, offset):
    from corgi.logic import Compound
    bucket = offset // 12
    if isinstance(term, Compound):
        return Compound(f"{term.functor}_{bucket}",
                        tuple(_rename_pred(a, offset) for a in term.args))
    return term


class _EveryClauseGuide(Guide):
    """Proposes every clause in program order; matching is all soft."""

    def __init__(self, embeddings):
        self.embeddings = embeddings

    def candidates(self, kb, goal, subst, parent_rule, left_rule, state, cfg):
        return [(c, i) for i, c in enumerate(kb.clauses)], 0.0, state


def test_soft_matching_bridges_phrasing_variants():
    """wake(me, ...) proves through an awake(i, ...) rule when the
    embeddings say the symbols are equivalent; exact resolution cannot."""
    kb = parse_program(
        "awake(Person1, Time1) :- alarmSet(Person1, Time1).\n"
        "alarmSet(i, early_morning).\n")
    goal = parse_term_text("wake(me, early_morning)")
    assert not solve(kb, goal)  # no wake clause anywhere

    rows = np.array([
        [1.0, 0.0, 0.0],   # wake
        [0.95, 0.05, 0.0],  # awake: close to wake
        [0.0, 1.0, 0.0],   # me
        [0.05, 0.95, 0.0],  # i: close to me
        [0.0, 0.0, 1.0],   # early_morning
        [0.3, 0.3, 0.3],   # alarmSet
    ])
    ids = {"wake": 0, "awake": 1, "me": 2, "i": 3, "early_morning": 4,
           "alarmSet": 5}
    close = MatrixEmbeddings(rows, ids)
    result = soft_prove(kb, _EveryClauseGuide(close), goal,
                        SoftProveConfig(k=2, t1=0.9))
    assert result
    assert result.used_soft_match[0]  # the root match crossed name variants
    # the root's arguments bound variables (no ground pairs); the fact match
    # keeps the query's ground symbol and records the head's alongside
    assert 0 not in result.soft_matches
    assert result.soft_matches[1] == [("me", "i")]
    leaves = [str(l.resolved_goal(result.bindings))
              for l in result.proof.leaves()]
    assert leaves == ["alarmSet(me, early_morning)"]

    # orthogonal rows refuse the bridge
    orthogonal = MatrixEmbeddings(np.eye(6), ids)
    assert not soft_prove(kb, _EveryClauseGuide(orthogonal), goal,
                          SoftProveConfig(k=2, t1=0.9))
