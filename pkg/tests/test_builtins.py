import pytest

from corgi.errors import ArithmeticTypeError, InstantiationError
from corgi.logic import (Atom, Substitution, Variable, eval_builtin, num,
                         parse_term_text)


def _subst(**kv):
    return Substitution({Variable(k): num(v) for k, v in kv.items()})


def test_assignment_evaluates_ground_rhs():
    s = eval_builtin(parse_term_text("LeaveAt = Time + PrepTime"),
                     _subst(Time=8, PrepTime=1))
    assert s is not None
    assert s.apply(Variable("LeaveAt")) == num(9)


def test_comparison_success_and_failure():
    assert eval_builtin(parse_term_text("Precipitation >= 2"),
                        _subst(Precipitation=3)) is not None
    assert eval_builtin(parse_term_text("Precipitation >= 2"),
                        _subst(Precipitation=1)) is None


def test_comparison_unbound_raises():
    with pytest.raises(InstantiationError):
        eval_builtin(parse_term_text("Precipitation >= 2"), Substitution())


def test_non_numeric_arithmetic_raises():
    with pytest.raises(ArithmeticTypeError):
        eval_builtin(parse_term_text("X >= monday"), _subst(X=1))


def test_equals_falls_back_to_unification():
    s = eval_builtin(parse_term_text("X = monday"), Substitution())
    assert s.apply(Variable("X")) == Atom("monday")


def test_equals_symbolic_rhs_binds_structurally():
    # PrepTime unbound: no evaluation, the variable takes the expression itself
    s = eval_builtin(parse_term_text("LeaveAt = Time + PrepTime"), _subst(Time=8))
    assert str(s.apply(Variable("LeaveAt"))) == "8 + PrepTime"


def test_numeric_equality_via_equals():
    assert eval_builtin(parse_term_text("2 = 1 + 1"), Substitution()) is not None
    assert eval_builtin(parse_term_text("2 = 1 + 2"), Substitution()) is None


def test_exact_division():
    s = eval_builtin(parse_term_text("X = 1 / 3"), Substitution())
    assert str(s.apply(Variable("X"))) == "1/3"
    s2 = eval_builtin(parse_term_text("Y = X * 3"), Substitution(s.bindings))
    assert s2.apply(Variable("Y")) == num(1)


def test_half_renders_as_decimal():
    s = eval_builtin(parse_term_text("X = 1 / 2"), Substitution())
    assert str(s.apply(Variable("X"))) == "0.5"


def test_division_by_zero_raises_in_comparison():
    with pytest.raises(ArithmeticTypeError):
        eval_builtin(parse_term_text("1 / 0 >= 1"), Substitution())


def test_division_by_zero_assignment_stays_symbolic():
    # mirrors plain Prolog =/2: no evaluation, the term binds as written
    s = eval_builtin(parse_term_text("X = 1 / 0"), Substitution())
    assert str(s.apply(Variable("X"))) == "1 / 0"
