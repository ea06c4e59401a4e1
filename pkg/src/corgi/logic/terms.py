"""Term model for the modified-Prolog language.

Terms are immutable. Numbers are exact rationals so that arithmetic
comparisons never hit float-equality noise; integral values render as
plain integers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, Optional, Tuple, Union

_fresh_ids = itertools.count(1)

#: functors evaluated by the engine instead of clause resolution
BUILTIN_FUNCTORS = ("=", "==", ">=", "=<", ">", "<")
#: comparison subset of the builtins (used by presumption extraction)
COMPARISON_FUNCTORS = ("==", ">=", "=<", ">", "<")
ARITH_FUNCTORS = ("+", "-", "*", "/")


def _decimal_text(value: Fraction) -> str:
    sign = "-" if value < 0 else ""
    value = abs(value)
    scale = 0
    while value.denominator != 1:
        value *= 10
        scale += 1
    digits = str(value.numerator).rjust(scale + 1, "0")
    return f"{sign}{digits[:-scale]}.{digits[-scale:]}"


def type_of_variable_name(name: str) -> str:
    """Type tag of a variable: name with trailing digits stripped, lowercased.

    Person1 -> "person", Date12 -> "date", X -> "x". Total and deterministic.
    """
    stripped = name.rstrip("0123456789")
    if not stripped:
        stripped = name
    return stripped.lower()


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Variable:
    name: str
    id: int = 0  # 0 = as written in source; >0 = renamed copy

    @property
    def type(self) -> str:
        return type_of_variable_name(self.name)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Number:
    value: Fraction

    def __str__(self) -> str:
        denom = self.value.denominator
        if denom == 1:
            return str(self.value.numerator)
        # denominators of the form 2^a * 5^b have exact decimal expansions,
        # so numbers that came from source text round-trip through rendering
        d = denom
        for p in (2, 5):
            while d % p == 0:
                d //= p
        if d == 1:
            return _decimal_text(self.value)
        return f"{self.value.numerator}/{denom}"


@dataclass(frozen=True)
class Compound:
    functor: str
    args: Tuple["Term", ...]

    def __post_init__(self):
        if not self.args:
            raise ValueError("compounds have arity >= 1; use Atom for arity 0")

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self) -> str:
        if self.functor in BUILTIN_FUNCTORS and len(self.args) == 2:
            return f"{self.args[0]} {self.functor} {self.args[1]}"
        if self.functor in ARITH_FUNCTORS and len(self.args) == 2:
            return f"{self.args[0]} {self.functor} {self.args[1]}"
        inner = ", ".join(str(a) for a in self.args)
        return f"{self.functor}({inner})"


Term = Union[Atom, Variable, Number, Compound]


def num(value) -> Number:
    return Number(Fraction(value))


def comp(functor: str, *args: Term) -> Compound:
    return Compound(functor, tuple(args))


def functor_arity(t: Term) -> Tuple[str, int]:
    """(name, arity) of a callable term; atoms are arity 0."""
    if isinstance(t, Compound):
        return t.functor, t.arity
    if isinstance(t, Atom):
        return t.name, 0
    raise TypeError(f"not callable: {t!r}")


def is_callable(t: Term) -> bool:
    return isinstance(t, (Atom, Compound))


def variables_of(t: Term) -> Iterator[Variable]:
    if isinstance(t, Variable):
        yield t
    elif isinstance(t, Compound):
        for a in t.args:
            yield from variables_of(a)


def rename_term(t: Term, mapping: Dict[Variable, Variable]) -> Term:
    """Replace variables via `mapping`, inventing fresh copies for new ones."""
    if isinstance(t, Variable):
        if t not in mapping:
            mapping[t] = Variable(t.name, next(_fresh_ids))
        return mapping[t]
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(rename_term(a, mapping) for a in t.args))
    return t


class Substitution:
    """Variable bindings with occurs-check on extension.

    Bindings may chain (X -> Y, Y -> a); `apply` resolves transitively, so
    applying twice equals applying once.
    """

    __slots__ = ("bindings",)

    def __init__(self, bindings: Optional[Dict[Variable, Term]] = None):
        self.bindings = bindings or {}

    def walk(self, t: Term) -> Term:
        """Follow variable links until an unbound variable or non-variable."""
        while isinstance(t, Variable) and t in self.bindings:
            t = self.bindings[t]
        return t

    def apply(self, t: Term) -> Term:
        t = self.walk(t)
        if isinstance(t, Compound):
            return Compound(t.functor, tuple(self.apply(a) for a in t.args))
        return t

    def occurs(self, v: Variable, t: Term) -> bool:
        t = self.walk(t)
        if isinstance(t, Variable):
            return t == v
        if isinstance(t, Compound):
            return any(self.occurs(v, a) for a in t.args)
        return False

    def bind(self, v: Variable, t: Term) -> Optional["Substitution"]:
        """Extended substitution, or None when the occurs-check trips."""
        if isinstance(t, Variable) and t == v:
            return self
        if self.occurs(v, t):
            return None
        new = dict(self.bindings)
        new[v] = t
        return Substitution(new)

    def copy(self) -> "Substitution":
        return Substitution(dict(self.bindings))

    def __len__(self) -> int:
        return len(self.bindings)

    def __repr__(self) -> str:
        inner = ", ".join(f"{v}↦{self.apply(t)}" for v, t in self.bindings.items())
        return "{" + inner + "}"


def unify(a: Term, b: Term, subst: Optional[Substitution] = None) -> Optional[Substitution]:
    """Most general unifier extending `subst`, or None on mismatch.

    Functor and arity must match exactly; occurs-check enforced.
    """
    if subst is None:
        subst = Substitution()
    a = subst.walk(a)
    b = subst.walk(b)
    if isinstance(a, Variable):
        return subst.bind(a, b)
    if isinstance(b, Variable):
        return subst.bind(b, a)
    if isinstance(a, Atom) and isinstance(b, Atom):
        return subst if a.name == b.name else None
    if isinstance(a, Number) and isinstance(b, Number):
        return subst if a.value == b.value else None
    if isinstance(a, Compound) and isinstance(b, Compound):
        if a.functor != b.functor or a.arity != b.arity:
            return None
        for x, y in zip(a.args, b.args):
            out = unify(x, y, subst)
            if out is None:
                return None
            subst = out
        return subst
    return None


def apply_substitution(t: Term, s: Substitution) -> Term:
    """Every bound variable in `t` replaced transitively."""
    return s.apply(t)


def term_text(t: Term) -> str:
    return str(t)
