"""Neural-guided backward chaining with soft unification.

At every proof node a guide proposes the top-k candidate clauses; a
candidate is accepted when the goal and the clause head match softly:
arity must be equal and every symbol pair (functor included) needs cosine
similarity above the threshold. Identical symbols always match. The prover
backtracks depth-first across candidates in rank order with full state
restoration.

The oracle variant keeps the same search but ranks by exact unifiability
and binds with exact unification; it is the evaluation upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .errors import UnknownSymbol
from .logic import (Atom, Clause, Compound, Failure, KnowledgeBase, Number,
                    ProofTree, Substitution, Term, Variable, eval_builtin,
                    functor_arity, is_builtin, rename_term, unify)


@dataclass
class SoftProveConfig:
    k: int = 5
    t1: float = 0.9
    t2: float = 0.5
    max_depth: int = 20
    max_steps: int = 100_000

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not (0.0 < self.t1 <= 1.0):
            raise ValueError("T1 must be in (0, 1]")
        if not (0.0 < self.t2 < 1.0):
            raise ValueError("T2 must be in (0, 1)")


class Embeddings:
    """Symbol -> vector lookup with cosine similarity."""

    def similarity(self, a: str, b: str) -> float:
        raise NotImplementedError


class OneHotEmbeddings(Embeddings):
    """Oracle rows: every symbol orthogonal to every other."""

    def similarity(self, a: str, b: str) -> float:
        return 1.0 if a == b else 0.0


class MatrixEmbeddings(Embeddings):
    def __init__(self, matrix: np.ndarray, symbol_ids: Dict[str, int]):
        self.matrix = matrix
        self.symbol_ids = symbol_ids

    def _row(self, symbol: str) -> np.ndarray:
        if symbol not in self.symbol_ids:
            raise UnknownSymbol(symbol)
        return self.matrix[self.symbol_ids[symbol]]

    def similarity(self, a: str, b: str) -> float:
        if a == b:
            return 1.0
        u, v = self._row(a), self._row(b)
        denom = float(np.linalg.norm(u) * np.linalg.norm(v))
        if denom == 0.0:
            return 0.0
        return float(np.dot(u, v) / denom)


class SessionEmbeddings(Embeddings):
    """Trained rows where available, identity-only for new symbols.

    Dialog sessions introduce vocabulary the embedding matrix has never
    seen (user answers, learned rules). Those symbols match themselves and
    nothing else, so soft proving degrades toward exact behavior on them
    instead of erroring out of the whole session.
    """

    def __init__(self, base: MatrixEmbeddings):
        self.base = base

    def similarity(self, a: str, b: str) -> float:
        if a == b:
            return 1.0
        if a not in self.base.symbol_ids or b not in self.base.symbol_ids:
            return 0.0
        return self.base.similarity(a, b)


def _symbol_name(t: Term) -> str:
    if isinstance(t, Atom):
        return t.name
    if isinstance(t, Number):
        return str(t)
    raise UnknownSymbol(f"no embedding for non-symbol term {t}")


def soft_unify(query: Term, head: Term, embeddings: Embeddings, t1: float,
               subst: Optional[Substitution] = None
               ) -> Optional[Tuple[Substitution, List[Tuple[str, str]], bool]]:
    """Soft match of a goal against a clause head.

    Fails fast on arity mismatch. The functor pair and every ground argument
    pair must clear the similarity threshold (identical symbols always
    pass). Ground-to-variable pairs bind the variable, variable pairs alias,
    ground pairs bind nothing: the query keeps its own symbol and the
    matched head symbol is recorded alongside.

    Returns (substitution, matched ground pairs, used_soft) or None.
    """
    if subst is None:
        subst = Substitution()
    qname, qarity = functor_arity(query)
    hname, harity = functor_arity(head)
    if qarity != harity:
        return None
    used_soft = False
    if qname != hname:
        if embeddings.similarity(qname, hname) <= t1:
            return None
        used_soft = True
    matched: List[Tuple[str, str]] = []
    qargs = query.args if isinstance(query, Compound) else ()
    hargs = head.args if isinstance(head, Compound) else ()
    for qa, ha in zip(qargs, hargs):
        qa = subst.walk(qa)
        ha = subst.walk(ha)
        if isinstance(qa, Variable) or isinstance(ha, Variable):
            out = unify(qa, ha, subst)
            if out is None:
                return None
            subst = out
            continue
        if isinstance(qa, Number) or isinstance(ha, Number):
            # numbers only match equal numbers (no cosine over numerals)
            if isinstance(qa, Number) and isinstance(ha, Number) and \
                    qa.value == ha.value:
                continue
            return None
        qs, hs = _symbol_name(qa), _symbol_name(ha)
        if qs == hs:
            continue
        if embeddings.similarity(qs, hs) <= t1:
            return None
        used_soft = True
        matched.append((qs, hs))
    return subst, matched, used_soft


@dataclass
class SoftProofResult:
    proof: ProofTree
    bindings: Substitution
    rule_choices: List[Tuple[int, int, int]]  # (t, clause_id, rank in top-k)
    used_soft_match: Dict[int, bool]
    termination_scores: Dict[int, float]
    # ground pairs accepted by similarity rather than identity, per node:
    # the query keeps its own symbol, the matched head symbol sits alongside
    soft_matches: Dict[int, List[Tuple[str, str]]] = None

    def __post_init__(self):
        if self.soft_matches is None:
            self.soft_matches = {}

    def __bool__(self) -> bool:
        return True


class Guide:
    """Candidate source for the soft prover. State is opaque and immutable."""

    embeddings: Embeddings

    def start_state(self):
        return None

    def candidates(self, kb: KnowledgeBase, goal: Term, subst: Substitution,
                   parent_rule: int, left_rule: int, state,
                   cfg: "SoftProveConfig"
                   ) -> Tuple[List[Tuple[Clause, int]], float, object]:
        """Ranked (clause, rank) candidates, termination score, next state.

        The guide owns the k cut: a learned guide returns its top-k ranked
        clauses, the oracle returns every exactly-unifiable clause.
        """
        raise NotImplementedError

    def match(self, goal: Term, head: Term, subst: Substitution, t1: float):
        """Soft match; (subst, matched_pairs, used_soft) or None."""
        return soft_unify(goal, head, self.embeddings, t1, subst)


class OracleGuide(Guide):
    """Exact-unifiability ranking in program order, exact bindings."""

    def __init__(self):
        self.embeddings = OneHotEmbeddings()

    def candidates(self, kb, goal, subst, parent_rule, left_rule, state, cfg):
        ranked = []
        rank = 0
        for clause in kb.candidates(goal):
            head = rename_term(clause.head, {})
            if unify(goal, head, subst) is not None:
                ranked.append((clause, rank))
                rank += 1
        return ranked, 0.0, state

    def match(self, goal, head, subst, t1):
        out = unify(goal, head, subst)
        if out is None:
            return None
        return out, [], False


class _SoftSearch:
    def __init__(self, kb: KnowledgeBase, guide: Guide, cfg: SoftProveConfig):
        self.kb = kb
        self.guide = guide
        self.cfg = cfg
        self.steps = 0
        self.pruned = False
        self.node_info: Dict[int, Tuple[int, bool, float]] = {}

    def prove(self, goal: Term, subst: Substitution, depth: int,
              parent_rule: int, left_rule: int, state
              ) -> Iterator[Tuple[Substitution, ProofTree, object]]:
        if depth > self.cfg.max_depth:
            self.pruned = True
            return
        if is_builtin(goal):
            self.steps += 1
            if self.steps > self.cfg.max_steps:
                self.pruned = True
                return
            out = eval_builtin(goal, subst)
            if out is not None:
                node = ProofTree(goal=goal, clause_id=None, bindings={})
                # builtins bypass the guide entirely: state does not advance
                yield out, node, state
            return
        ranked, c_t, state = self.guide.candidates(
            self.kb, goal, subst, parent_rule, left_rule, state, self.cfg)
        for clause, rank in ranked:
            self.steps += 1
            if self.steps > self.cfg.max_steps:
                self.pruned = True
                return
            mapping: Dict[Variable, Variable] = {}
            head = rename_term(clause.head, mapping)
            hit = self.guide.match(goal, head, subst, self.cfg.t1)
            if hit is None:
                continue
            unified, matched, used_soft = hit
            body = [rename_term(g, mapping) for g in clause.body]
            for final, children, out_state in self.prove_all(
                    body, unified, depth + 1, clause.id, state):
                node = ProofTree(goal=goal, clause_id=clause.id, bindings={},
                                 children=children)
                self.node_info[id(node)] = (rank, used_soft, c_t, matched)
                yield final, node, out_state

    def prove_all(self, goals: List[Term], subst: Substitution, depth: int,
                  parent_rule: int, state
                  ) -> Iterator[Tuple[Substitution, List[ProofTree], object]]:
        if not goals:
            yield subst, [], state
            return
        first, rest = goals[0], goals[1:]
        for s1, node, st1 in self.prove(first, subst, depth, parent_rule, -1,
                                        state):
            left = node.clause_id if node.clause_id is not None else -1
            for s2, nodes, st2 in self._prove_rest(rest, s1, depth,
                                                   parent_rule, left, st1):
                yield s2, [node] + nodes, st2

    def _prove_rest(self, goals, subst, depth, parent_rule, left_rule, state):
        if not goals:
            yield subst, [], state
            return
        first, rest = goals[0], goals[1:]
        for s1, node, st1 in self.prove(first, subst, depth, parent_rule,
                                        left_rule, state):
            left = node.clause_id if node.clause_id is not None else left_rule
            for s2, nodes, st2 in self._prove_rest(rest, s1, depth,
                                                   parent_rule, left, st1):
                yield s2, [node] + nodes, st2


def soft_prove(kb: KnowledgeBase, guide: Guide, goal: Term,
               cfg: Optional[SoftProveConfig] = None):
    """First soft proof of `goal`, or Failure.

    The search accepts a candidate clause when the guide's match succeeds,
    recurses into its body left to right threading the guide state, and
    completes when no goals are pending. Termination scores are advisory
    and recorded per node.
    """
    cfg = cfg or SoftProveConfig()
    search = _SoftSearch(kb, guide, cfg)
    for subst, tree, _ in search.prove(goal, Substitution(), 0, -1, -1,
                                       guide.start_state()):
        tree.assign_t(0)
        choices = []
        soft_flags = {}
        scores = {}
        matches = {}
        for node in tree.nodes():
            info = search.node_info.get(id(node))
            if info is not None:
                rank, used_soft, c_t, matched = info
                choices.append((node.t, node.clause_id, rank))
                soft_flags[node.t] = used_soft
                scores[node.t] = c_t
                if matched:
                    matches[node.t] = matched
        return SoftProofResult(proof=tree, bindings=subst,
                               rule_choices=choices,
                               used_soft_match=soft_flags,
                               termination_scores=scores,
                               soft_matches=matches)
    return Failure("limit" if search.pruned else "exhausted")


def oracle_prove(kb: KnowledgeBase, goal: Term,
                 cfg: Optional[SoftProveConfig] = None):
    """soft_prove with exact-unifiability candidate ranking (upper bound)."""
    return soft_prove(kb, OracleGuide(), goal, cfg)


def soft_replay(kb: KnowledgeBase, result: SoftProofResult, guide: Guide,
                cfg: Optional[SoftProveConfig] = None) -> bool:
    """Re-run recorded rule choices; True when the same tree re-derives."""
    cfg = cfg or SoftProveConfig()
    subst = Substitution()

    def step(node: ProofTree) -> bool:
        nonlocal subst
        if node.clause_id is None:
            out = eval_builtin(node.goal, subst)
            if out is None:
                return False
            subst = out
            return True
        clause = kb.clause(node.clause_id)
        if len(clause.body) != len(node.children):
            return False
        mapping: Dict[Variable, Variable] = {}
        head = rename_term(clause.head, mapping)
        hit = guide.match(node.goal, head, subst, cfg.t1)
        if hit is None:
            return False
        subst = hit[0]
        for child, body_goal in zip(node.children, clause.body):
            renamed = rename_term(body_goal, mapping)
            out = unify(child.goal, renamed, subst)
            if out is None:
                return False
            subst = out
            if not step(child):
                return False
        return True

    return step(result.proof)
