"""Training-corpus generation: synthesize provable queries, serialize proofs.

A proof tree linearizes to one step per node in depth-first left-to-right
order. Each step records the query symbol ids as posed, the chosen clause,
the parent / nearest-left-sister clause context, and the argument symbols
after the step's unification. Builtin evaluations keep their slot in the
sequence (so step indices match proof `t` indices) with a -1 rule sentinel;
the model skips them.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .errors import GenerationExhausted, InconsistentTree
from .logic import (Atom, Compound, KnowledgeBase, Number, ProofTree,
                    Substitution, Term, Variable, functor_arity, rename_term,
                    solve, unify)

NO_RULE = -1  # sentinel clause id: absent parent/sister or builtin step


@dataclass
class TraceStep:
    t: int
    query_name: str
    query_args: List[int]
    parent_rule_id: int
    left_sister_rule_id: int
    target_rule_id: int
    target_args: List[int]
    terminate: bool


class SymbolTable:
    """Bidirectional symbol <-> integer id map, insertion ordered."""

    def __init__(self, symbols: Sequence[str] = ()):
        self._ids: Dict[str, int] = {}
        for s in symbols:
            self.add(s)

    def add(self, symbol: str) -> int:
        if symbol not in self._ids:
            self._ids[symbol] = len(self._ids)
        return self._ids[symbol]

    def id(self, symbol: str) -> int:
        return self._ids[symbol]

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._ids

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def symbols(self) -> List[str]:
        return list(self._ids)

    def name(self, idx: int) -> str:
        return self.symbols[idx]


@dataclass
class TraceCorpus:
    symbol_table: SymbolTable
    traces: List[List[TraceStep]]
    kb_fingerprint: str
    queries: List[str] = field(default_factory=list)

    def dumps(self) -> str:
        header = {
            "kind": "corgi-trace-corpus",
            "version": 1,
            "kb_fingerprint": self.kb_fingerprint,
            "symbols": self.symbol_table.symbols,
        }
        lines = [json.dumps(header, sort_keys=True)]
        for query, steps in zip(self.queries, self.traces):
            record = {
                "query": query,
                "steps": [[s.t, s.query_name, s.query_args, s.parent_rule_id,
                           s.left_sister_rule_id, s.target_rule_id,
                           s.target_args, s.terminate] for s in steps],
            }
            lines.append(json.dumps(record, sort_keys=True))
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "TraceCorpus":
        lines = [l for l in text.splitlines() if l.strip()]
        header = json.loads(lines[0])
        if header.get("kind") != "corgi-trace-corpus":
            raise ValueError("not a trace corpus file")
        table = SymbolTable(header["symbols"])
        traces, queries = [], []
        for line in lines[1:]:
            record = json.loads(line)
            steps = [TraceStep(t=s[0], query_name=s[1], query_args=s[2],
                               parent_rule_id=s[3], left_sister_rule_id=s[4],
                               target_rule_id=s[5], target_args=s[6],
                               terminate=s[7]) for s in record["steps"]]
            traces.append(steps)
            queries.append(record["query"])
        return cls(symbol_table=table, traces=traces,
                   kb_fingerprint=header["kb_fingerprint"], queries=queries)

    @classmethod
    def load(cls, path) -> "TraceCorpus":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.loads(fh.read())


def _term_symbol(t: Term) -> str:
    if isinstance(t, Atom):
        return t.name
    if isinstance(t, Number):
        return str(t)
    if isinstance(t, Variable):
        return t.name
    return t.functor  # compound argument: fall back to its functor symbol


def _arg_symbols(goal: Term, subst: Substitution, table: SymbolTable) -> List[int]:
    if not isinstance(goal, Compound):
        return []
    return [table.add(_term_symbol(subst.walk(a))) for a in goal.args]


def tree_to_trace(proof: ProofTree, kb: KnowledgeBase,
                  table: Optional[SymbolTable] = None) -> List[TraceStep]:
    """One TraceStep per proof node, in `t` order.

    Re-derives the substitution by replaying the tree, so the recorded
    argument symbols match what the prover saw at each step. Raises
    InconsistentTree when the tree does not agree with the KB's clauses.
    """
    if table is None:
        table = SymbolTable(kb.symbols())
    steps: List[TraceStep] = []
    subst = Substitution()

    def walk(node: ProofTree, parent_rule: int, left_rule: int) -> None:
        nonlocal subst
        name, _ = functor_arity(node.goal) if isinstance(
            node.goal, (Atom, Compound)) else (str(node.goal), 0)
        query_args = _arg_symbols(node.goal, subst, table)
        if node.clause_id is None:
            from .logic import eval_builtin
            out = eval_builtin(node.goal, subst)
            if out is None:
                raise InconsistentTree(f"builtin re-evaluation failed at t={node.t}")
            subst = out
            steps.append(TraceStep(
                t=node.t, query_name=name, query_args=query_args,
                parent_rule_id=parent_rule, left_sister_rule_id=left_rule,
                target_rule_id=NO_RULE,
                target_args=_arg_symbols(node.goal, subst, table),
                terminate=False))
            return
        if not kb.has_clause(node.clause_id):
            raise InconsistentTree(f"unknown clause id {node.clause_id}")
        clause = kb.clause(node.clause_id)
        if len(clause.body) != len(node.children):
            raise InconsistentTree(
                f"clause {node.clause_id} body length {len(clause.body)} != "
                f"{len(node.children)} children")
        mapping: Dict[Variable, Variable] = {}
        head = rename_term(clause.head, mapping)
        out = unify(node.goal, head, subst)
        if out is None:
            raise InconsistentTree(f"head unification failed at t={node.t}")
        subst = out
        steps.append(TraceStep(
            t=node.t, query_name=name, query_args=query_args,
            parent_rule_id=parent_rule, left_sister_rule_id=left_rule,
            target_rule_id=clause.id,
            target_args=_arg_symbols(node.goal, subst, table),
            terminate=False))
        left = NO_RULE
        for child, body_goal in zip(node.children, clause.body):
            renamed = rename_term(body_goal, mapping)
            linked = unify(child.goal, renamed, subst)
            if linked is None:
                raise InconsistentTree(f"body goal mismatch under t={node.t}")
            subst = linked
            walk(child, clause.id, left)
            if child.clause_id is not None:
                left = child.clause_id

    walk(proof, NO_RULE, NO_RULE)
    steps.sort(key=lambda s: s.t)
    if steps:
        steps[-1].terminate = True
    return steps


def trace_to_tree(steps: List[TraceStep], kb: KnowledgeBase) -> ProofTree:
    """Rebuild the proof-tree shape by forcing each step's clause choice."""
    pos = 0

    def build() -> ProofTree:
        nonlocal pos
        step = steps[pos]
        pos += 1
        if step.target_rule_id == NO_RULE:
            return ProofTree(goal=Atom(step.query_name), clause_id=None,
                             bindings={}, t=step.t)
        clause = kb.clause(step.target_rule_id)
        node = ProofTree(goal=Atom(step.query_name),
                         clause_id=step.target_rule_id, bindings={}, t=step.t)
        node.children = [build() for _ in clause.body]
        return node

    tree = build()
    if pos != len(steps):
        raise InconsistentTree("trace has trailing steps")
    return tree


def generate_queries(kb: KnowledgeBase, count: int, seed: int,
                     max_depth: int = 20) -> List[Term]:
    """Provable queries synthesized from clause heads.

    Each head variable is left free with probability 0.5, otherwise
    grounded by a type-consistent atom from the KB. Rejection sampling
    keeps only queries the exact prover can prove.
    """
    if count <= 0:
        raise ValueError("count must be positive")
    rng = random.Random(seed)
    clauses = kb.clauses
    if not clauses:
        raise GenerationExhausted("empty knowledge base")
    atoms_by_type: Dict[str, List[str]] = {}
    for name in kb.atoms():
        atoms_by_type.setdefault(kb.type_of_atom(name), []).append(name)
    queries: List[Term] = []
    attempts = 0
    budget = 100 * count
    while len(queries) < count and attempts < budget:
        attempts += 1
        clause = rng.choice(clauses)
        head = rename_term(clause.head, {})
        goal = _instantiate(head, rng, atoms_by_type)
        if solve(kb, goal, max_depth=max_depth):
            queries.append(goal)
    if len(queries) < count:
        raise GenerationExhausted(
            f"only {len(queries)}/{count} provable queries after "
            f"{attempts} attempts")
    return queries


def _instantiate(head: Term, rng: random.Random,
                 atoms_by_type: Dict[str, List[str]]) -> Term:
    if not isinstance(head, Compound):
        return head
    args = []
    for a in head.args:
        if isinstance(a, Variable) and rng.random() < 0.5:
            pool = atoms_by_type.get(a.type)
            if pool:
                args.append(Atom(rng.choice(pool)))
                continue
        args.append(a)
    return Compound(head.functor, tuple(args))


def build_corpus(kb: KnowledgeBase, count: int, seed: int,
                 max_depth: int = 20) -> TraceCorpus:
    """Generate queries, prove them, and serialize the proof traces."""
    table = SymbolTable(kb.symbols())
    queries = generate_queries(kb, count, seed, max_depth=max_depth)
    traces = []
    kept_queries = []
    for q in queries:
        res = solve(kb, q, max_depth=max_depth)
        if not res:
            continue
        traces.append(tree_to_trace(res.tree, kb, table))
        kept_queries.append(str(q))
    return TraceCorpus(symbol_table=table, traces=traces,
                       kb_fingerprint=kb.fingerprint(), queries=kept_queries)
