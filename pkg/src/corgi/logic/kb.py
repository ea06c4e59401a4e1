"""Clauses and the knowledge base that holds them."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Dict, Iterable, List, Tuple

from .parser import parse_clauses
from .terms import Atom, Compound, Number, Term, functor_arity

#: clause provenance values
PROV_KB = "kb"                    # shipped with the program text
PROV_USER_SESSION = "user-session"  # learned during a dialog
PROV_USER_STATE = "user-state"      # transient user/context facts


@dataclass
class Clause:
    head: Term
    body: Tuple[Term, ...]
    id: int
    provenance: str = PROV_KB
    domain: str = "everyday"

    @property
    def is_fact(self) -> bool:
        return not self.body

    def text(self) -> str:
        if self.is_fact:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(str(g) for g in self.body)}."


class KnowledgeBase:
    """Ordered clause store with a (functor, arity) index.

    Clause ids are assigned once and never reused, so rows of an embedding
    matrix indexed by clause id stay aligned across deletions.
    """

    def __init__(self):
        self._clauses: Dict[int, Clause] = {}
        self._order: List[int] = []
        self.index: Dict[Tuple[str, int], List[int]] = {}
        self.types_dict: Dict[str, str] = {}
        self._next_id = 0

    # -- construction ------------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "KnowledgeBase":
        kb = cls()
        for raw in parse_clauses(text):
            prov = PROV_USER_STATE if raw.user_state else PROV_KB
            kb.add_clause(raw.head, raw.body, provenance=prov, domain=raw.domain)
        return kb

    @classmethod
    def from_file(cls, path) -> "KnowledgeBase":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def load_types(self, path) -> None:
        """Types dictionary: one `noun<TAB>type` pair per line."""
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                noun, _, tag = line.partition("\t")
                if tag:
                    self.types_dict[noun.strip()] = tag.strip()

    # -- mutation ----------------------------------------------------------

    def add_clause(self, head: Term, body: Iterable[Term] = (),
                   provenance: str = PROV_KB, domain: str = "everyday") -> Clause:
        clause = Clause(head=head, body=tuple(body), id=self._next_id,
                        provenance=provenance, domain=domain)
        self._next_id += 1
        self._clauses[clause.id] = clause
        self._order.append(clause.id)
        self.index.setdefault(functor_arity(head), []).append(clause.id)
        return clause

    def remove_clause(self, clause_id: int) -> None:
        clause = self._clauses.pop(clause_id)
        self._order.remove(clause_id)
        bucket = self.index[functor_arity(clause.head)]
        bucket.remove(clause_id)
        if not bucket:
            del self.index[functor_arity(clause.head)]

    # -- queries -----------------------------------------------------------

    @property
    def clauses(self) -> List[Clause]:
        return [self._clauses[cid] for cid in self._order]

    def __len__(self) -> int:
        return len(self._order)

    def clause(self, clause_id: int) -> Clause:
        return self._clauses[clause_id]

    def has_clause(self, clause_id: int) -> bool:
        return clause_id in self._clauses

    def candidates(self, goal: Term) -> List[Clause]:
        """Clauses whose head shares the goal's functor/arity, program order."""
        key = functor_arity(goal)
        return [self._clauses[cid] for cid in self.index.get(key, [])]

    @property
    def next_id(self) -> int:
        return self._next_id

    def predicates(self) -> List[Tuple[str, int]]:
        return list(self.index.keys())

    def atoms(self) -> List[str]:
        """All atom names appearing anywhere in the program, in first-seen order."""
        seen: Dict[str, None] = {}
        for clause in self.clauses:
            for term in (clause.head, *clause.body):
                for name in _atom_names(term):
                    seen.setdefault(name, None)
        return list(seen)

    def symbols(self) -> List[str]:
        """Atoms, numbers (as text) and variable names, first-seen order."""
        seen: Dict[str, None] = {}
        for clause in self.clauses:
            for term in (clause.head, *clause.body):
                for name in _symbol_names(term):
                    seen.setdefault(name, None)
        return list(seen)

    def type_of_atom(self, name: str) -> str:
        return self.types_dict.get(name, "thing")

    def text(self) -> str:
        return "\n".join(c.text() for c in self.clauses)

    def fingerprint(self) -> str:
        return hashlib.sha256(self.text().encode("utf-8")).hexdigest()


def _atom_names(term: Term):
    if isinstance(term, Atom):
        yield term.name
    elif isinstance(term, Compound):
        for a in term.args:
            yield from _atom_names(a)


def _symbol_names(term: Term):
    if isinstance(term, Atom):
        yield term.name
    elif isinstance(term, Number):
        yield str(term)
    elif isinstance(term, Compound):
        for a in term.args:
            yield from _symbol_names(a)
    else:  # Variable
        yield term.name


class SessionKB(KnowledgeBase):
    """Copy-on-write overlay over an immutable base knowledge base.

    Additions live only in the overlay; the base is shared between sessions
    and never mutated. Clause ids continue from the base's counter so the
    overlay and base never collide.
    """

    def __init__(self, base: KnowledgeBase):
        super().__init__()
        self.base = base
        self._next_id = base.next_id
        self.types_dict = dict(base.types_dict)

    @property
    def clauses(self) -> List[Clause]:
        return self.base.clauses + [self._clauses[cid] for cid in self._order]

    def __len__(self) -> int:
        return len(self.base) + len(self._order)

    def clause(self, clause_id: int) -> Clause:
        if clause_id in self._clauses:
            return self._clauses[clause_id]
        return self.base.clause(clause_id)

    def has_clause(self, clause_id: int) -> bool:
        return clause_id in self._clauses or self.base.has_clause(clause_id)

    def candidates(self, goal: Term) -> List[Clause]:
        key = functor_arity(goal)
        ids = self.base.index.get(key, []) + self.index.get(key, [])
        return [self.clause(cid) for cid in ids]

    def predicates(self) -> List[Tuple[str, int]]:
        keys = list(self.base.index.keys())
        keys += [k for k in self.index.keys() if k not in self.base.index]
        return keys

    def local_clauses(self) -> List[Clause]:
        return [self._clauses[cid] for cid in self._order]

    def symbols(self) -> List[str]:
        seen = dict.fromkeys(self.base.symbols())
        for clause in self.local_clauses():
            for term in (clause.head, *clause.body):
                for name in _symbol_names(term):
                    seen.setdefault(name, None)
        return list(seen)

    def text(self) -> str:
        parts = [self.base.text()] + [c.text() for c in self.local_clauses()]
        return "\n".join(p for p in parts if p)


def parse_program(text: str) -> KnowledgeBase:
    """Parse program text into a fresh knowledge base."""
    return KnowledgeBase.from_text(text)
