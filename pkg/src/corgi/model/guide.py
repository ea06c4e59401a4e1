"""Bridge from the trained model to the soft prover's guide interface."""

from __future__ import annotations

from typing import List, Tuple

import numpy as np

from ..errors import ShapeError
from ..logic import KnowledgeBase, Substitution, Term, functor_arity
from ..softprove import Guide, MatrixEmbeddings, SessionEmbeddings
from ..traces import NO_RULE
from .network import StepState, step
from .params import ModelParams


class NeuralGuide(Guide):
    """Ranks candidate clauses with the model's rule head.

    Clauses the model was trained over are ranked by distribution mass;
    session-local clauses (ids beyond the embedding matrix) are appended
    after the ranked candidates in program order, arity permitting, since
    the model has no rows for them.
    """

    def __init__(self, params: ModelParams, kb: KnowledgeBase):
        if params.kb_fingerprint != kb.fingerprint():
            base = getattr(kb, "base", None)
            if base is None or params.kb_fingerprint != base.fingerprint():
                raise ShapeError("model fingerprint does not match knowledge base")
        self.params = params
        # out-of-vocabulary symbols (session rules, user answers) match
        # themselves only, instead of erroring the whole proof
        self.embeddings = SessionEmbeddings(
            MatrixEmbeddings(params["M_var"], params.symbol_ids))

    def start_state(self):
        return StepState.initial(self.params)

    def candidates(self, kb: KnowledgeBase, goal: Term, subst: Substitution,
                   parent_rule: int, left_rule: int, state: StepState, cfg):
        name, arity = functor_arity(goal)
        # session clauses have no embedding row; their context contributes
        # the same zero vector as an absent parent/sister
        parent = self._known(parent_rule)
        left = self._known(left_rule)
        c_t, rule_dist, _, next_state = step(
            self.params, state, name, (parent, left), [])
        order = np.argsort(-rule_dist, kind="stable")
        ranked: List[Tuple[object, int]] = []
        rank = 0
        for rid in order[:cfg.k]:
            rid = int(rid)
            if not kb.has_clause(rid):
                continue
            ranked.append((kb.clause(rid), rank))
            rank += 1
        for clause in kb.clauses:
            if clause.id >= self.params.n_rules and \
                    functor_arity(clause.head)[1] == arity:
                ranked.append((clause, rank))
                rank += 1
        return ranked, c_t, next_state

    def _known(self, rule_id) -> int:
        if rule_id is None or rule_id < 0 or rule_id >= self.params.n_rules:
            return NO_RULE
        return rule_id
