"""Logic core: terms, program parsing, unification, backward chaining."""

from .builtins import eval_arith, eval_builtin, is_builtin
from .engine import (DEFAULT_MAX_DEPTH, DEFAULT_MAX_STEPS, Failure,
                     ProofResult, ProofTree, replay, solve)
from .kb import (PROV_KB, PROV_USER_SESSION, PROV_USER_STATE, Clause,
                 KnowledgeBase, SessionKB, parse_program)
from .parser import parse_clauses, parse_term_text
from .terms import (BUILTIN_FUNCTORS, COMPARISON_FUNCTORS, Atom, Compound,
                    Number, Substitution, Term, Variable, apply_substitution,
                    comp, functor_arity, is_callable, num, rename_term,
                    term_text, type_of_variable_name, unify, variables_of)

__all__ = [
    "Atom", "Variable", "Number", "Compound", "Term", "Substitution",
    "unify", "apply_substitution", "variables_of", "functor_arity",
    "is_callable", "comp", "num", "rename_term", "term_text",
    "type_of_variable_name",
    "Clause", "KnowledgeBase", "SessionKB", "parse_program",
    "parse_clauses", "parse_term_text",
    "eval_builtin", "eval_arith", "is_builtin",
    "solve", "replay", "ProofTree", "ProofResult", "Failure",
    "DEFAULT_MAX_DEPTH", "DEFAULT_MAX_STEPS",
    "PROV_KB", "PROV_USER_SESSION", "PROV_USER_STATE",
    "BUILTIN_FUNCTORS", "COMPARISON_FUNCTORS",
]
