"""Conversational state machine around the prover.

A session parses the if-then-because command into state/action/goal logical
forms, adds the state and action as session-local context facts (the
command premises), and tries to prove the goal. When the goal predicate is
unknown it asks the user how to achieve it, stacking sub-goals; once an
answer lands in the knowledge base, the stacked goals unwind into new
head :- body rules, the proof runs, and the proof must actually touch both
the state and the action. Failed proofs roll the learned rules back.

Presumptions are read off the successful proof: comparison builtins tied to
the state's variables, and user-state facts the proof consumed that the
command never mentioned.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

from .errors import CorgiError, EmptyClause, MissingClause
from .logic import (COMPARISON_FUNCTORS, PROV_USER_SESSION, PROV_USER_STATE,
                    Compound, KnowledgeBase, ProofTree, SessionKB,
                    Substitution, Term, apply_substitution, variables_of)
from .nlparse import (LogicalForm, align_with_kb, predicate_in_kb,
                      render_goal_text, split_command, to_logical_form)
from .softprove import (Embeddings, Guide, OracleGuide, SoftProofResult,
                        SoftProveConfig, soft_prove, soft_unify)

ASK_TEMPLATE = "How do I know if ``{goal}''?"
CONFIRM_TEMPLATE = ("Okay, I will perform ``{action}'' in order to achieve "
                    "``{goal}''.")
FAIL_TEMPLATE = "Sorry, I could not figure out how to achieve ``{goal}''."
CLARIFY_TEMPLATE = ("I did not understand that. Please answer like ``If "
                    "<something> happens''.")


class NotAwaitingAnswer(CorgiError):
    """An answer arrived while the session was not waiting for one."""


class ParseFailure(CorgiError):
    """The command itself could not be split or converted."""


@dataclass
class Presumption:
    node_t: int
    form: Term
    kind: str  # "state_constraint" | "user_fact"
    rendered: str

    def to_record(self) -> dict:
        return {"node_t": self.node_t, "form": str(self.form),
                "kind": self.kind, "rendered": self.rendered}


@dataclass
class SystemAction:
    type: str  # "ask" | "succeed" | "fail"
    text: str
    proof: Optional[dict] = None
    presumptions: List[Presumption] = field(default_factory=list)
    reason: str = ""

    def to_record(self) -> dict:
        record = {"type": self.type, "text": self.text}
        if self.reason:
            record["reason"] = self.reason
        if self.proof is not None:
            record["proof"] = self.proof
            record["presumptions"] = [p.to_record() for p in self.presumptions]
        return record


@dataclass
class DialogSession:
    id: str
    kb_view: SessionKB
    guide: Guide
    cfg: SoftProveConfig
    n: int
    S: LogicalForm
    A: LogicalForm
    G: LogicalForm
    goal_text: str
    action_text: str
    goal_stack: List[LogicalForm] = field(default_factory=list)
    i: int = 0
    pending_rule_ids: List[int] = field(default_factory=list)
    contributed_rules: List[str] = field(default_factory=list)
    transcript: List[Tuple[str, str]] = field(default_factory=list)
    status: str = "awaiting_user"  # awaiting_user | succeeded | failed
    result: Optional[SoftProofResult] = None
    presumptions: List[Presumption] = field(default_factory=list)
    clarified_once: bool = False
    current_question_text: str = ""

    def say(self, speaker: str, text: str) -> None:
        self.transcript.append((speaker, text))


def start_session(base_kb: KnowledgeBase, command_text: str,
                  guide_factory: Callable[[KnowledgeBase], Guide] = None,
                  cfg: Optional[SoftProveConfig] = None,
                  n: int = 3) -> Tuple[DialogSession, SystemAction]:
    """Parse the command, seed the session KB, and take the first step.

    Raises ParseFailure when the command does not split into its three
    clauses or a clause yields no logical form; no session is created then.
    """
    cfg = cfg or SoftProveConfig()
    guide_factory = guide_factory or (lambda kb: OracleGuide())
    try:
        parts = split_command(command_text)
        s_lf = to_logical_form(parts.state_text)
        a_lf = to_logical_form(parts.action_text)
        g_lf = to_logical_form(parts.goal_text)
    except (MissingClause, EmptyClause) as exc:
        raise ParseFailure(str(exc)) from exc

    kb_view = SessionKB(base_kb)
    s_lf = align_with_kb(s_lf, kb_view)
    a_lf = align_with_kb(a_lf, kb_view)
    g_lf = align_with_kb(g_lf, kb_view)
    # the command's premises: transient context the proof may consume
    kb_view.add_clause(s_lf.term, provenance=PROV_USER_STATE)
    kb_view.add_clause(a_lf.term, provenance=PROV_USER_STATE)

    session = DialogSession(
        id=uuid.uuid4().hex[:12], kb_view=kb_view,
        guide=guide_factory(kb_view), cfg=cfg, n=n,
        S=s_lf, A=a_lf, G=g_lf,
        goal_text=render_goal_text(parts.goal_text),
        action_text=parts.action_text)
    session.say("user", command_text.strip())

    if predicate_in_kb(session.G, kb_view):
        return session, _prove_phase(session)
    if session.n == 0:
        # feedback disabled: no questions, the incomplete KB loses outright
        return session, _fail(session, "no_feedback")
    return session, _ask(session, session.goal_text)


def user_answer(session: DialogSession, text: str) -> SystemAction:
    """Feed one user answer through the feedback loop."""
    if session.status != "awaiting_user":
        raise NotAwaitingAnswer(f"session is {session.status}")
    session.say("user", text.strip())
    try:
        answer_lf = to_logical_form(text)
    except EmptyClause:
        if not session.clarified_once:
            session.clarified_once = True
            action = SystemAction(type="ask", text=CLARIFY_TEMPLATE)
            session.say("corgi", action.text)
            return action
        session.i += 1
        if session.i > session.n:
            return _fail(session, "loop_bound")
        return _ask(session, session.current_question_text, raw=True)

    answer_lf = align_with_kb(answer_lf, session.kb_view)
    session.i += 1
    session.goal_stack.append(session.G)
    session.G = answer_lf

    if predicate_in_kb(answer_lf, session.kb_view):
        _knowledge_base_update_loop(session)
        return _prove_phase(session)
    if session.i > session.n:
        return _fail(session, "loop_bound")
    return _ask(session, render_goal_text(text))


def _knowledge_base_update_loop(session: DialogSession) -> None:
    # unwind the goal stack into head :- body rules, newest answer innermost
    while session.goal_stack:
        top = session.goal_stack[-1]
        clause = session.kb_view.add_clause(
            top.term, [session.G.term], provenance=PROV_USER_SESSION)
        session.pending_rule_ids.append(clause.id)
        session.contributed_rules.append(clause.text())
        session.G = session.goal_stack.pop()


def _ask(session: DialogSession, goal_text: str, raw: bool = False) -> SystemAction:
    text = goal_text if raw else ASK_TEMPLATE.format(goal=goal_text)
    session.current_question_text = text
    session.status = "awaiting_user"
    action = SystemAction(type="ask", text=text)
    session.say("corgi", text)
    return action


def _fail(session: DialogSession, reason: str) -> SystemAction:
    _rollback(session)
    session.status = "failed"
    action = SystemAction(type="fail",
                          text=FAIL_TEMPLATE.format(goal=session.goal_text),
                          reason=reason)
    session.say("corgi", action.text)
    return action


def _rollback(session: DialogSession) -> None:
    for cid in session.pending_rule_ids:
        session.kb_view.remove_clause(cid)
    session.pending_rule_ids.clear()


def _prove_phase(session: DialogSession) -> SystemAction:
    """Prove the goal and verify the proof covers the state and the action."""
    try:
        result = soft_prove(session.kb_view, session.guide, session.G.term,
                            session.cfg)
        if result:
            covered_s = _covers(session, result.proof, session.S)
            covered_a = _covers(session, result.proof, session.A)
            if covered_s and covered_a:
                session.result = result
                session.presumptions = extract_presumptions(
                    result.proof, result.bindings, session.S, session.A,
                    session.kb_view, session.guide.embeddings, session.cfg.t1)
                session.status = "succeeded"
                action = SystemAction(
                    type="succeed",
                    text=CONFIRM_TEMPLATE.format(action=session.action_text,
                                                 goal=session.goal_text),
                    proof=result.proof.to_record(result.bindings),
                    presumptions=session.presumptions)
                session.say("corgi", action.text)
                return action
            reason = "state_not_covered" if not covered_s else "action_not_covered"
            return _fail(session, reason)
        return _fail(session, f"no_proof_{result.reason}")
    except CorgiError as exc:
        return _fail(session, f"engine_error: {exc}")


def _covers(session: DialogSession, proof: ProofTree, lf: LogicalForm) -> bool:
    for node in proof.nodes():
        if node.clause_id is None:
            continue
        if soft_unify(lf.term, node.goal, session.guide.embeddings,
                      session.cfg.t1) is not None:
            return True
    return False


def extract_presumptions(proof: ProofTree, bindings: Substitution,
                         S: LogicalForm, A: LogicalForm, kb: KnowledgeBase,
                         embeddings: Embeddings, t1: float
                         ) -> List[Presumption]:
    """Presumptions exposed by a successful proof, in visit order.

    (a) comparison-builtin leaves whose variables tie into a node matching
        the state: unstated numeric conditions on the state.
    (b) user-state fact leaves that match neither the state nor the action:
        context the proof consumed that the command never said.
    """
    state_vars = set()
    for node in proof.nodes():
        if node.clause_id is None:
            continue
        if soft_unify(S.term, node.goal, embeddings, t1) is not None:
            state_vars.update(variables_of(node.goal))

    out: List[Presumption] = []
    for node in proof.nodes():
        if node.clause_id is None:
            functor = node.goal.functor if isinstance(node.goal, Compound) else ""
            if functor in COMPARISON_FUNCTORS and \
                    state_vars & set(variables_of(node.goal)):
                out.append(Presumption(node_t=node.t, form=node.goal,
                                       kind="state_constraint",
                                       rendered=str(node.goal)))
            continue
        if not node.children and kb.has_clause(node.clause_id):
            clause = kb.clause(node.clause_id)
            if clause.provenance == PROV_USER_STATE:
                if soft_unify(S.term, node.goal, embeddings, t1) is None and \
                        soft_unify(A.term, node.goal, embeddings, t1) is None:
                    resolved = apply_substitution(node.goal, bindings)
                    out.append(Presumption(node_t=node.t, form=resolved,
                                           kind="user_fact",
                                           rendered=str(resolved)))
    out.sort(key=lambda p: p.node_t)
    return out


def export_transcript(session: DialogSession) -> str:
    """Plain-text transcript: user lines flush left, system lines indented."""
    lines = []
    for speaker, text in session.transcript:
        lines.append(f"    {text}" if speaker == "corgi" else text)
    return "\n".join(lines)
