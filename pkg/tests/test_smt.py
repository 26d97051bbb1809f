import hashlib
import itertools

import pytest
from hypothesis import given, settings, strategies as st

from bonsai_checker import smt
from bonsai_checker.bonsai import concretize, fresh_tree, pat, redex_size, symbolic_size
from bonsai_checker.bonsai import test as pattern_test
from bonsai_checker.grammar import enumerate_trees, parse_grammar, syntax_checker, vocabulary
from bonsai_checker.symcore import FALSE, TRUE, Session, eval_formula, eval_int, int_const, int_sum, ite_int
from conftest import needs_solver
from helpers import DOMAIN, build, formula_trees, naive


def test_empty_goal_is_preamble_and_check_sat():
    text = smt.emit_smtlib(smt.Goal.of([]))
    assert text == "(set-logic QF_LIA)\n(set-option :produce-models true)\n(check-sat)\n"


def test_single_eq_is_one_declaration_and_one_assert(session):
    c = session.fresh_const(["zero", "succ"])
    text = smt.emit_smtlib(smt.Goal.of([session.mk_eq(c, "zero")]))
    lines = text.splitlines()
    assert [ln for ln in lines if ln.startswith("(declare-fun")] == ["(declare-fun c0 () Int)"]
    assert "(assert (and (<= 0 c0) (< c0 2)))" in lines
    asserts = [ln for ln in lines if ln.startswith("(assert") and "<=" not in ln]
    assert asserts == ["(assert (= c0 0))"]
    assert "define-fun" not in text


def _arith_goal(s):
    g = parse_grammar("([exp zero (succ exp) (if exp exp exp) (zero? exp)])")
    t = fresh_tree(None, 4, vocabulary(g))
    return smt.Goal.of([syntax_checker(g)(None, t)], symbolic_size(t), s.constants)


def test_emission_is_byte_reproducible():
    digests = set()
    for _ in range(2):
        with Session() as s:
            digests.add(hashlib.sha256(smt.emit_smtlib(_arith_goal(s)).encode()).hexdigest())
    assert len(digests) == 1


def test_shared_subformulas_are_defined_once(session):
    a, b = session.fresh_const(DOMAIN), session.fresh_const(DOMAIN)
    shared = session.mk_or(session.mk_eq(a, "p"), session.mk_eq(b, "q"))
    goal = smt.Goal.of([session.mk_and(shared, session.mk_eq(a, "r")), session.mk_not(shared)])
    text = smt.emit_smtlib(goal)
    assert text.count("(or (= c0 0) (= c1 1))") == 1


def test_bounded_goal_emits_the_objective_bound(session):
    c = session.fresh_const(["x", "y"])
    obj = ite_int(session.mk_eq(c, "x"), int_const(3), int_const(7))
    text = smt.emit_smtlib(smt.Goal.of([TRUE], obj).bounded(4))
    assert "(define-fun n0 () Int (ite (= c0 0) 3 7))" in text
    assert "(assert (<= n0 4))" in text


@needs_solver
def test_sat_and_model(session):
    c = session.fresh_const(["zero", "succ"])
    res = smt.solve(smt.Goal.of([session.mk_eq(c, "zero")]))
    assert res.status == "sat"
    assert res.model == {c: "zero"}


@needs_solver
def test_contradiction_is_unsat(session):
    c = session.fresh_const(["zero", "succ"])
    res = smt.solve(smt.Goal.of([session.mk_eq(c, "zero"), session.mk_eq(c, "succ")]))
    assert res.status == "unsat"
    assert res.model is None


@needs_solver
def test_false_goal_is_unsat(session):
    assert smt.solve(smt.Goal.of([FALSE])).status == "unsat"


def test_missing_solver_is_a_transport_error(session):
    c = session.fresh_const(["x", "y"])
    with pytest.raises(smt.SolverError, match="not found"):
        smt.solve(smt.Goal.of([session.mk_eq(c, "x")]), solver="/nonexistent/z3-missing")


def test_garbage_output_is_not_unsat(session, tmp_path):
    fake = tmp_path / "fake-solver"
    fake.write_text("#!/bin/sh\ncat > /dev/null\necho '(error \"boom\")'\n")
    fake.chmod(0o755)
    c = session.fresh_const(["x", "y"])
    with pytest.raises(smt.SolverError):
        smt.solve(smt.Goal.of([session.mk_eq(c, "x")]), solver=str(fake))


def test_parse_model_rejects_out_of_domain(session):
    c = session.fresh_const(["x", "y"])
    with pytest.raises(smt.SolverError, match="outside"):
        smt.parse_model("((c0 5))", [c])
    with pytest.raises(smt.SolverError, match="missing"):
        smt.parse_model("()", [c, session.fresh_const(["x", "y"])])


@needs_solver
def test_minimize_constant_objective(session):
    c = session.fresh_const(["x", "y"])
    goal = smt.Goal.of([session.mk_eq(c, "y")], int_const(5))
    res = smt.minimize(goal)
    assert res.sat and res.objective == 5 and res.optimality == "optimal"
    assert smt.solve(goal.bounded(4)).status == "unsat"


@needs_solver
def test_minimize_unsat_goal(session):
    res = smt.minimize(smt.Goal.of([FALSE], int_const(1)))
    assert res.status == "unsat"


def test_minimize_needs_an_objective(session):
    with pytest.raises(ValueError):
        smt.minimize(smt.Goal.of([TRUE]))


@needs_solver
def test_minimize_matches_enumeration_on_smallest_if_term():
    g = parse_grammar("([exp zero (succ exp) (if exp exp exp) (zero? exp)])")
    with Session() as s:
        t = fresh_tree(None, 5, vocabulary(g))
        syntax = syntax_checker(g)(None, t)
        # programs headed by `if`; the smallest is (if zero zero zero)
        is_if, _ = pattern_test(pat("(if ?c ?t ?e)"), t)
        goal = smt.Goal.of([syntax, is_if], symbolic_size(t), s.constants)
        res = smt.minimize(goal)
        assert smt.check_model(goal, res.model)
        tree = concretize(t, res.model)
    best = min(redex_size(p) for p in enumerate_trees(g, 11, max_depth=5) if p[0] == "if")
    assert res.objective == best == redex_size(tree) == 5


@needs_solver
@settings(max_examples=30, deadline=None)
@given(formula_trees(3), st.lists(st.integers(0, 6), min_size=3, max_size=3))
def test_solve_and_minimize_agree_with_brute_force(tree, weights):
    with Session() as s:
        consts = [s.fresh_const(DOMAIN) for _ in range(3)]
        f = build(s, consts, tree)
        obj = int_sum(ite_int(s.mk_eq(c, "q"), int_const(w), int_const(1)) for c, w in zip(consts, weights))
        goal = smt.Goal.of([f], obj, consts)
        sats = [vals for vals in itertools.product(DOMAIN, repeat=3) if naive(tree, vals)]
        res = smt.minimize(goal)
        if not sats:
            assert res.status == "unsat"
            return
        assert res.sat
        assert smt.check_model(goal, res.model)
        assert eval_formula(f, res.model)
        best = min(sum(w if v == "q" else 1 for v, w in zip(vals, weights)) for vals in sats)
        assert res.objective == eval_int(obj, res.model) == best
