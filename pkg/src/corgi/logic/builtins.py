"""Arithmetic builtins: `=` with directed evaluation, plus comparisons."""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from ..errors import ArithmeticTypeError, InstantiationError
from .terms import (ARITH_FUNCTORS, BUILTIN_FUNCTORS, Compound, Number,
                    Substitution, Term, Variable, unify)


def is_builtin(goal: Term) -> bool:
    return isinstance(goal, Compound) and goal.arity == 2 and \
        goal.functor in BUILTIN_FUNCTORS


def eval_arith(t: Term, s: Substitution) -> Fraction:
    """Numeric value of a ground arithmetic expression.

    Raises InstantiationError on unbound variables and ArithmeticTypeError
    on atoms or non-arithmetic compounds.
    """
    t = s.walk(t)
    if isinstance(t, Number):
        return t.value
    if isinstance(t, Variable):
        raise InstantiationError(f"unbound variable {t} in arithmetic")
    if isinstance(t, Compound) and t.functor in ARITH_FUNCTORS:
        if t.arity == 1 and t.functor == "-":
            return -eval_arith(t.args[0], s)
        if t.arity == 2:
            a = eval_arith(t.args[0], s)
            b = eval_arith(t.args[1], s)
            if t.functor == "+":
                return a + b
            if t.functor == "-":
                return a - b
            if t.functor == "*":
                return a * b
            if b == 0:
                raise ArithmeticTypeError("division by zero")
            return a / b
    raise ArithmeticTypeError(f"not a number: {t}")


def _try_eval(t: Term, s: Substitution) -> Optional[Fraction]:
    """Value when `t` evaluates to a ground number, else None."""
    try:
        return eval_arith(t, s)
    except (InstantiationError, ArithmeticTypeError):
        return None


def eval_builtin(goal: Term, s: Substitution) -> Optional[Substitution]:
    """Evaluate a builtin goal; extended substitution on success, None on failure.

    `=` binds an unbound side to the evaluated other side when that side is a
    ground arithmetic expression; otherwise it falls back to plain
    unification (no constraint solving). Comparisons require both sides to
    evaluate to numbers.
    """
    if not is_builtin(goal):
        raise ValueError(f"not a builtin goal: {goal}")
    op = goal.functor
    lhs, rhs = goal.args
    if op == "=":
        left = s.walk(lhs)
        right = s.walk(rhs)
        if isinstance(left, Variable):
            value = _try_eval(right, s)
            if value is not None:
                return s.bind(left, Number(value))
        if isinstance(right, Variable):
            value = _try_eval(left, s)
            if value is not None:
                return s.bind(right, Number(value))
        # both sides evaluable: numeric equality (2 = 1 + 1 holds)
        lv, rv = _try_eval(left, s), _try_eval(right, s)
        if lv is not None and rv is not None:
            return s if lv == rv else None
        return unify(left, right, s)

    a = eval_arith(lhs, s)
    b = eval_arith(rhs, s)
    ok = {
        "==": a == b,
        ">=": a >= b,
        "=<": a <= b,
        ">": a > b,
        "<": a < b,
    }[op]
    return s if ok else None
