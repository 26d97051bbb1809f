import random

import pytest

from bonsai_checker.bonsai import concretize, const_tree, embed_sexpr, force, fresh_tree, parse_program, to_sexpr, tree_depth
from bonsai_checker.grammar import enumerate_trees, vocabulary
from bonsai_checker.langs import LANGS, get_model
from bonsai_checker.langs.base import ExecOutcome, concrete_run
from bonsai_checker.symcore import FALSE, TRUE, EvalCtx, Session, eval_formula
from helpers import random_program

ARITH_WITNESS = "(succ (if (zero? (succ zero)) zero (zero? zero)))"

BUG_SETTINGS = [(lang, bug) for lang in sorted(LANGS) for bug in (None, *get_model(lang).bugs)]


def _value(v):
    return to_sexpr(concretize(v, {}))


class Pipeline:
    """One symbolic check and execute over a fresh tree, replayable per model."""

    def __init__(self, model, depth, fuel, bug):
        self.model, self.fuel, self.bug = model, fuel, bug
        self.tree = fresh_tree(None, depth, vocabulary(model.grammar))
        tc, xc = EvalCtx(), EvalCtx()
        self.type = model.check(tc, self.tree, bug)
        self.checked = tc.holds()
        self.out: ExecOutcome = model.execute(xc, self.tree, fuel, bug)

    def outcome(self, program):
        m = force(self.tree, program)
        cache: dict = {}
        if eval_formula(self.out.failure(), m, cache):
            got = "fail"
        elif eval_formula(self.out.out_of_fuel, m, cache):
            got = "out_of_fuel"
        else:
            got = "ok"
        return m, eval_formula(self.checked, m, cache), got

    def assert_agrees(self, program):
        m, typechecks, got = self.outcome(program)
        want = concrete_run(self.model, program, self.fuel, self.bug)
        assert typechecks == want.typechecks, to_sexpr(program)
        if want.typechecks:
            assert got == want.outcome, to_sexpr(program)
            if want.outcome == "ok" and isinstance(want.value, (int, str)) and want.value != "error":
                assert to_sexpr(concretize(self.out.value, m)) == want.value


def _small_programs(model, size):
    return list(enumerate_trees(model.grammar, size))


def _concrete_agrees(model, program, fuel, bug):
    c = const_tree(program)
    tc = EvalCtx()
    model.check(tc, c, bug)
    out = model.execute(EvalCtx(), c, fuel, bug)
    typechecks = tc.holds()
    assert typechecks in (TRUE, FALSE)
    want = concrete_run(model, program, fuel, bug)
    assert (typechecks is TRUE) == want.typechecks, to_sexpr(program)
    if want.typechecks:
        if out.failure() is TRUE:
            got = "fail"
        elif out.out_of_fuel is TRUE:
            got = "out_of_fuel"
        else:
            assert out.failure() is FALSE and out.out_of_fuel is FALSE
            got = "ok"
        assert got == want.outcome, to_sexpr(program)


@pytest.mark.parametrize("lang,bug", BUG_SETTINGS)
def test_symbolic_twins_agree_on_all_small_programs(lang, bug):
    model = get_model(lang)
    with Session():
        for p in _small_programs(model, 7):
            _concrete_agrees(model, p, model.default_fuel, bug)


FORCED_DEPTH = {"arith": 6, "stlc": 3, "lam": 4, "mini": 5}


@pytest.mark.parametrize("lang,bug", BUG_SETTINGS)
def test_forcing_models_agree_on_every_small_tree(lang, bug):
    model = get_model(lang)
    depth = FORCED_DEPTH[lang]
    with Session():
        pipe = Pipeline(model, depth, model.default_fuel, bug)
        for p in enumerate_trees(model.grammar, 10**6, max_depth=depth):
            pipe.assert_agrees(p)


def _random_corpus(model, depth, n, seed=0):
    rng = random.Random(seed)
    seen: dict = {}
    for _ in range(200_000):
        e = random_program(model.grammar, rng, budget=40)
        if e is None:
            continue
        t = embed_sexpr(e)
        if tree_depth(t) <= depth:
            seen.setdefault(t, None)
            if len(seen) == n:
                break
    return list(seen)


@pytest.mark.parametrize("lang,bug", [("stlc", None), ("stlc", "stlc-5"), ("stlc", "stlc-9"), ("arith", "arith-if"), ("lam", None)])
def test_random_corpus_at_query_depth(lang, bug):
    model = get_model(lang)
    depth = model.default_depth
    corpus = _random_corpus(model, depth, 500)
    if lang == "stlc":
        assert len(corpus) == 500
    with Session():
        pipe = Pipeline(model, depth, model.default_fuel, bug)
        for p in corpus:
            pipe.assert_agrees(p)


def test_arith_zero(session):
    m = get_model("arith")
    t = embed_sexpr("zero")
    ctx = EvalCtx()
    assert _value(m.check(ctx, const_tree(t))) == "nat"
    assert ctx.holds() is TRUE
    out = m.execute(EvalCtx(), const_tree(t))
    assert _value(out.value) == 0
    assert out.ok is TRUE
    assert out.out_of_fuel is FALSE
    r = concrete_run(m, t)
    assert (r.typechecks, r.outcome, r.value) == (True, "ok", 0)


def test_arith_witness_needs_the_bug(session):
    m = get_model("arith")
    t = parse_program(ARITH_WITNESS)
    ctx = EvalCtx()
    assert _value(m.check(ctx, const_tree(t), "arith-if")) == "nat"
    assert ctx.holds() is TRUE
    strict = EvalCtx()
    m.check(strict, const_tree(t))
    assert strict.holds() is FALSE
    out = m.execute(EvalCtx(), const_tree(t))
    assert out.ok is FALSE
    r = concrete_run(m, t, bug="arith-if")
    assert (r.typechecks, r.outcome) == (True, "fail")
    assert not concrete_run(m, t).typechecks


def test_stlc_identity_application(session):
    m = get_model("stlc")
    t = parse_program("((lambda (a int) a) 0)")
    ctx = EvalCtx()
    assert _value(m.check(ctx, const_tree(t))) == "int"
    assert ctx.holds() is TRUE
    out = m.execute(EvalCtx(), const_tree(t), 4)
    assert _value(out.value) == 0
    assert out.ok is TRUE
    r = concrete_run(m, t, 4)
    assert (r.typechecks, r.outcome, r.value) == (True, "ok", 0)


def test_stlc_bug5_size_nine_witness():
    m = get_model("stlc")
    t = parse_program("(hd (tl ((cons 0) nil)))")
    r = concrete_run(m, t, 4, "stlc-5")
    assert (r.typechecks, r.outcome) == (True, "fail")
    assert concrete_run(m, t, 4).outcome == "ok"


@pytest.mark.parametrize("lang", sorted(LANGS))
def test_no_bug_means_no_small_counterexample(lang):
    m = get_model(lang)
    for p in _small_programs(m, 7):
        r = concrete_run(m, p, m.default_fuel)
        assert not (r.typechecks and r.outcome == "fail"), to_sexpr(p)


@pytest.mark.parametrize("lang", ["stlc", "lam"])
def test_fuel_monotonicity(lang):
    m = get_model(lang)
    for p in _small_programs(m, 8):
        prev = concrete_run(m, p, 1)
        for k in range(2, 6):
            cur = concrete_run(m, p, k)
            if prev.outcome in ("ok", "fail"):
                assert (cur.outcome, cur.value) == (prev.outcome, prev.value), to_sexpr(p)
            prev = cur


def test_fuel_runs_out_on_a_self_application():
    m = get_model("lam")
    omega = parse_program("((lambda a (a a)) (lambda a (a a)))")
    assert concrete_run(m, omega, 4).outcome == "out_of_fuel"
    with Session():
        pipe = Pipeline(m, tree_depth(omega), 4, None)
        _, typechecks, got = pipe.outcome(omega)
        assert typechecks and got == "out_of_fuel"


def test_mini_rewrites_swap_and_id(session):
    m = get_model("mini")
    r = concrete_run(m, parse_program("(swap (id a) (swap a (id a)))"))
    assert r.outcome == "ok"
    assert to_sexpr(r.value) == ("swap", ("swap", "a", "a"), "a")
    assert to_sexpr(concrete_run(m, parse_program("(id a)")).value) == "a"


def test_unknown_bug_is_rejected():
    with pytest.raises(ValueError, match="unknown bug"):
        concrete_run(get_model("arith"), embed_sexpr("zero"), bug="stlc-4")
    with pytest.raises(ValueError):
        get_model("cobol")
