"""Depth-first backward chaining with proof-tree output.

Clauses are tried in program order with fresh variable renaming per use.
The search returns the first complete proof. Visit indices `t` enumerate
proof nodes in depth-first left-to-right preorder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from .builtins import eval_builtin, is_builtin
from .kb import KnowledgeBase
from .terms import (Substitution, Term, Variable, apply_substitution,
                    rename_term, unify)

DEFAULT_MAX_DEPTH = 20
DEFAULT_MAX_STEPS = 100_000


@dataclass
class ProofTree:
    """One resolution step: `goal` solved by clause `clause_id`.

    `goal` is the goal as posed (renamed clause-body term, before this
    node's own unification). `clause_id` is None for builtin evaluations.
    `bindings` holds only this step's extension of the substitution.
    """

    goal: Term
    clause_id: Optional[int]
    bindings: Dict[Variable, Term]
    children: List["ProofTree"] = field(default_factory=list)
    t: int = -1

    def nodes(self) -> Iterator["ProofTree"]:
        yield self
        for child in self.children:
            yield from child.nodes()

    def leaves(self) -> Iterator["ProofTree"]:
        if not self.children:
            yield self
        else:
            for child in self.children:
                yield from child.leaves()

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def assign_t(self, start: int = 0) -> int:
        self.t = start
        nxt = start + 1
        for child in self.children:
            nxt = child.assign_t(nxt)
        return nxt

    def resolved_goal(self, subst: Substitution) -> Term:
        return apply_substitution(self.goal, subst)

    def render(self, subst: Optional[Substitution] = None, indent: str = "  ") -> str:
        """Indented text form, one node per line with its t index."""
        lines: List[str] = []

        def walk(node: "ProofTree", depth: int):
            goal = node.resolved_goal(subst) if subst is not None else node.goal
            lines.append(f"{indent * depth}t={node.t} {goal}")
            for child in node.children:
                walk(child, depth + 1)

        walk(self, 0)
        return "\n".join(lines)

    def to_record(self, subst: Optional[Substitution] = None) -> dict:
        goal = self.resolved_goal(subst) if subst is not None else self.goal
        return {
            "t": self.t,
            "goal": str(goal),
            "clause_id": self.clause_id,
            "children": [c.to_record(subst) for c in self.children],
        }


@dataclass
class ProofResult:
    tree: ProofTree
    bindings: Substitution

    def __bool__(self) -> bool:
        return True


@dataclass
class Failure:
    reason: str  # "exhausted" | "limit"

    def __bool__(self) -> bool:
        return False


class _Search:
    def __init__(self, kb: KnowledgeBase, max_depth: int, max_steps: int):
        self.kb = kb
        self.max_depth = max_depth
        self.max_steps = max_steps
        self.steps = 0
        self.pruned = False

    def prove(self, goal: Term, subst: Substitution, depth: int
              ) -> Iterator[Tuple[Substitution, ProofTree]]:
        if depth > self.max_depth:
            self.pruned = True
            return
        if is_builtin(goal):
            self.steps += 1
            if self.steps > self.max_steps:
                self.pruned = True
                return
            out = eval_builtin(goal, subst)
            if out is not None:
                delta = _delta(subst, out)
                yield out, ProofTree(goal=goal, clause_id=None, bindings=delta)
            return
        for clause in self.kb.candidates(goal):
            self.steps += 1
            if self.steps > self.max_steps:
                self.pruned = True
                return
            mapping: Dict[Variable, Variable] = {}
            head = rename_term(clause.head, mapping)
            unified = unify(goal, head, subst)
            if unified is None:
                continue
            body = [rename_term(g, mapping) for g in clause.body]
            delta = _delta(subst, unified)
            for final, children in self.prove_all(body, unified, depth + 1):
                yield final, ProofTree(goal=goal, clause_id=clause.id,
                                       bindings=delta, children=children)

    def prove_all(self, goals: List[Term], subst: Substitution, depth: int
                  ) -> Iterator[Tuple[Substitution, List[ProofTree]]]:
        if not goals:
            yield subst, []
            return
        first, rest = goals[0], goals[1:]
        for s1, node in self.prove(first, subst, depth):
            for s2, nodes in self.prove_all(rest, s1, depth):
                yield s2, [node] + nodes


def _delta(before: Substitution, after: Substitution) -> Dict[Variable, Term]:
    return {v: t for v, t in after.bindings.items() if v not in before.bindings}


def solve(kb: KnowledgeBase, goal: Term,
          max_depth: int = DEFAULT_MAX_DEPTH,
          max_steps: int = DEFAULT_MAX_STEPS):
    """First proof of `goal` against `kb`, or a tagged Failure.

    Returns ProofResult(tree, bindings) on success. Failure("limit") means a
    depth/step bound pruned the search; Failure("exhausted") means the whole
    space was explored.
    """
    if max_depth <= 0 or max_steps <= 0:
        raise ValueError("limits must be positive")
    search = _Search(kb, max_depth, max_steps)
    for subst, tree in search.prove(goal, Substitution(), 0):
        tree.assign_t(0)
        return ProofResult(tree=tree, bindings=subst)
    return Failure("limit" if search.pruned else "exhausted")


def replay(kb: KnowledgeBase, tree: ProofTree) -> Optional[Substitution]:
    """Re-run a proof tree's resolutions; final substitution or None.

    Each node's goal must re-unify with its clause head (renamed against the
    recorded child count), and builtin nodes must re-evaluate true.
    """
    subst = Substitution()

    def step(node: ProofTree) -> bool:
        nonlocal subst
        if node.clause_id is None:
            out = eval_builtin(node.goal, subst)
            if out is None:
                return False
            subst = out
            return not node.children
        clause = kb.clause(node.clause_id)
        if len(clause.body) != len(node.children):
            return False
        mapping: Dict[Variable, Variable] = {}
        head = rename_term(clause.head, mapping)
        out = unify(node.goal, head, subst)
        if out is None:
            return False
        subst = out
        for child, body_goal in zip(node.children, clause.body):
            renamed = rename_term(body_goal, mapping)
            out = unify(child.goal, renamed, subst)
            if out is None:
                return False
            subst = out
            if not step(child):
                return False
        return True

    return subst if step(tree) else None
