"""Congruence closure for cons/car/cdr terms and the atom predicate."""

import pytest

from setsyl.errors import UnsupportedAtomError
from setsyl.formulas import AtomPred, Eq, In, ListOp, Not, Or, Var

from setsyl.lists import ListState, list_check, list_implied

x, y, z, l = Var("x"), Var("y"), Var("z"), Var("l")


def cons(a, b):
    return ListOp("cons", (a, b))


def car(t):
    return ListOp("car", (t,))


def cdr(t):
    return ListOp("cdr", (t,))


def state(*lits) -> ListState:
    return ListState(lits)


# ------------------------------------------------------------- acceptance


def test_empty_state_satisfiable():
    assert list_check(state()) is True


def test_projection_out_of_cons():
    # x = car(cons(y, l)) collapses x into y's class
    s = state(Eq(x, car(cons(y, l))))
    assert list_check(s) is True
    assert s.same_class("x", "y")
    assert not s.same_class("x", "l")


def test_cdr_projection():
    s = state(Eq(x, cdr(cons(y, l))))
    assert s.same_class("x", "l")


def test_projection_through_equality():
    # z = cons(y, l) and x = car(z): car sees a cons in z's class
    s = state(Eq(z, cons(y, l)), Eq(x, car(z)))
    assert s.same_class("x", "y")


def test_atom_of_cons_unsat():
    s = state(AtomPred(cons(x, y)))
    assert list_check(s) is False
    assert s.unsat_reason == "an atom's class contains a cons cell"


def test_atom_spreads_through_class():
    s = state(Eq(z, cons(x, y)), AtomPred(z))
    assert list_check(s) is False


def test_atom_alone_satisfiable():
    assert list_check(state(AtomPred(x))) is True


def test_not_atom_materializes_projections():
    # not atom(x) makes x a cell, so car(x) and cdr(x) determine it
    s = state(Not(AtomPred(x)), Eq(y, car(x)), Eq(z, cdr(x)), Eq(x, cons(y, z)))
    assert list_check(s) is True


def test_not_atom_then_atom_unsat():
    s = state(Not(AtomPred(x)), AtomPred(x))
    assert list_check(s) is False


def test_cons_injectivity():
    s = state(Eq(cons(x, y), cons(z, l)))
    assert s.same_class("x", "z")
    assert s.same_class("y", "l")


def test_injectivity_refutes_disequality():
    s = state(Eq(cons(x, y), cons(z, l)), Not(Eq(x, z)))
    assert list_check(s) is False
    assert s.unsat_reason == "both sides of a disequality collapsed"


def test_congruence_of_equal_arguments():
    # x = y forces cons(x, z) = cons(y, z)
    s = state(Eq(x, y), Not(Eq(cons(x, z), cons(y, z))))
    assert list_check(s) is False


def test_car_congruence():
    s = state(Eq(x, y), Not(Eq(car(x), car(y))))
    assert list_check(s) is False


def test_no_acyclicity_requirement():
    # rational trees: a list may be its own tail
    s = state(Eq(x, cons(y, x)))
    assert list_check(s) is True


def test_self_referential_chain_satisfiable():
    s = state(Eq(x, cons(y, z)), Eq(z, cons(y, x)))
    assert list_check(s) is True


def test_plain_disequality_satisfiable():
    s = state(Not(Eq(x, y)))
    assert list_check(s) is True


def test_disequality_with_self_unsat():
    assert list_check(state(Not(Eq(x, x)))) is False


# ------------------------------------------------------------ incremental


def test_incremental_assertions_match_batch():
    s = state()
    assert list_check(s) is True
    s.assert_literal(Eq(x, car(cons(y, l))))
    assert s.same_class("x", "y")
    s.assert_literal(Not(Eq(x, y)))
    assert list_check(s) is False
    batch = state(Eq(x, car(cons(y, l))), Not(Eq(x, y)))
    assert list_check(batch) is False
    assert batch.unsat_reason == s.unsat_reason


# ----------------------------------------------------------------- errors


def test_rejects_foreign_atoms():
    with pytest.raises(UnsupportedAtomError):
        state(In(x, y))
    with pytest.raises(UnsupportedAtomError):
        state(Or((Eq(x, y), Eq(y, z))))


def test_rejects_non_list_terms():
    from setsyl.formulas import SetOp

    with pytest.raises(UnsupportedAtomError):
        state(Eq(x, SetOp("union", y, z)))


# ---------------------------------------------------------------- queries


def test_same_class_unknown_variable():
    s = state(Eq(x, y))
    assert not s.same_class("x", "q")


def test_representatives_pick_least_variable():
    s = state(Eq(z, y), Eq(y, x))
    reps = s.representatives(["x", "y", "z"])
    assert reps == {"x": "x", "y": "x", "z": "x"}


def test_representatives_print_pure_terms():
    s = state(Eq(x, cons(y, z)))
    reps = s.representatives(["x", "y", "z", "missing"])
    assert reps["x"] == "x"
    assert "missing" not in reps
    # a variable equated to nothing prints as itself
    assert reps["y"] == "y"


def test_implied_pairs_orientation_and_order():
    s = state(Eq(x, y), Eq(z, l))
    assert list_implied(s, ["x", "y", "z", "l"]) == (("x", "y"), ("z", "l"))
    assert list_implied(s, ["l", "z"]) == (("l", "z"),)


def test_implied_via_projection():
    s = state(Eq(x, car(cons(y, l))))
    assert list_implied(s, ["x", "y", "l"]) == (("x", "y"),)


def test_implied_ignores_unknown_names():
    s = state(Eq(x, y))
    assert list_implied(s, ["x", "q", "y"]) == (("x", "y"),)
