import pytest

from bonsai_checker import classic
from bonsai_checker.bonsai import all_models, concrete_match, concretize, pat, redex_size
from bonsai_checker.classic import EmptyUnion, UnionVal, branch_count, fresh_union_tree, lift, union_match, union_merge, union_size
from bonsai_checker.grammar import count_trees, enumerate_trees, is_valid, parse_grammar, syntax_checker
from bonsai_checker.langs import get_model
from bonsai_checker.langs.base import concrete_run, run_outcome
from bonsai_checker.symcore import TRUE, CLeaf, EvalCtx, Session, eval_formula, eval_int, formula_constants
from helpers import union_force

ARITH = parse_grammar("([exp zero (succ exp) (if exp exp exp) (zero? exp)])")
LAM = parse_grammar("([e X (lambda X e) (e e)] [X a b c])")


def choice_models(u):
    return list(all_models(sorted(_consts(u), key=lambda c: c.id)))


def _consts(u):
    seen, out, stack = {}, set(), [u]
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen[id(x)] = x
        x = lift(x)
        for g, p in x.branches:
            out.update(formula_constants([g]))
            if isinstance(p, classic.UNode):
                stack += [p.left, p.right]
    return out


def test_depth_one_branch_counts(classic_session):
    assert branch_count(fresh_union_tree(None, ARITH, 1)) == 1
    assert branch_count(fresh_union_tree(None, LAM, 1)) == 3


def test_depth_too_small_is_an_error(classic_session):
    g = parse_grammar("([e (p e) (q x)])")
    with pytest.raises(EmptyUnion):
        fresh_union_tree(None, g, 1)


@pytest.mark.parametrize("g,depth", [(ARITH, d) for d in range(1, 7)] + [(LAM, d) for d in range(1, 4)])
def test_union_denotes_exactly_the_valid_trees(g, depth):
    with Session(encoding="classic"):
        u = fresh_union_tree(None, g, depth)
        trees = [concretize(u, m) for m in choice_models(u)]
        assert all(is_valid(g, t) for t in trees)
        assert len(set(trees)) == count_trees(g, depth)
        syntax = syntax_checker(g)(None, u)
        assert all(eval_formula(syntax, m) for m in choice_models(u))


def test_union_size_matches_redex_size(classic_session):
    u = fresh_union_tree(None, ARITH, 5)
    size = union_size(u)
    for m in choice_models(u):
        assert eval_int(size, m) == redex_size(concretize(u, m))


def test_merge_concatenates_branches(classic_session):
    s = classic_session
    a = fresh_union_tree(None, LAM, 1)
    q = s.mk_eq(s.fresh_const(("x", "y")), "x")
    b = UnionVal(((q, CLeaf("q")), (s.mk_not(q), CLeaf("r"))))
    flag = s.fresh_const(("t", "f"))
    m = union_merge(s.mk_eq(flag, "t"), a, b)
    assert branch_count(m) <= branch_count(a) + branch_count(b)
    for model in all_models(sorted(set(formula_constants([g for g, _ in m.branches])) | {flag}, key=lambda c: c.id)):
        want = concretize(a, model) if model[flag] == "t" else concretize(b, model)
        assert concretize(m, model) == want


def test_repeated_merges_grow_the_union(classic_session):
    s = classic_session
    u = UnionVal(((TRUE, CLeaf(0)),))
    sizes = []
    for i in range(1, 6):
        c = s.fresh_const(("t", "f"))
        u = union_merge(s.mk_eq(c, "t"), UnionVal(((TRUE, CLeaf(i)),)), u)
        sizes.append(branch_count(u))
    assert sizes == sorted(sizes) and sizes[-1] == 6


def test_match_agrees_with_concrete_match(classic_session):
    cases = [(pat("zero"), lambda: CLeaf("z")), (pat("(succ ?x)"), lambda x: x), (pat("(if ?c ?t ?e)"), lambda c, t, e: e)]
    u = fresh_union_tree(None, ARITH, 4)
    ctx = EvalCtx()
    out = union_match(ctx, u, cases)
    concrete = [(p, h) for p, h in zip([c[0] for c in cases], [lambda: "z", lambda x: x, lambda c, t, e: e])]
    for m in choice_models(u):
        tree = concretize(u, m)
        try:
            want = concrete_match(tree, concrete)
        except Exception:
            assert not eval_formula(ctx.holds(), m)
            continue
        assert eval_formula(ctx.holds(), m)
        assert concretize(out, m) == want


def _complete(model, consts):
    return {c: model.get(c, c.domain[0]) for c in consts}


@pytest.mark.parametrize(
    "lang,depth,bugs",
    [("arith", 5, (None, "arith-if")), ("lam", 4, (None,)), ("stlc", 3, (None, "stlc-1", "stlc-5", "stlc-7"))],
)
def test_classic_pipeline_agrees_with_concrete_twins(lang, depth, bugs):
    model = get_model(lang)
    trees = list(enumerate_trees(model.grammar, 10**6, max_depth=depth))
    for bug in bugs:
        with Session(encoding="classic") as s:
            u = fresh_union_tree(None, model.grammar, depth)
            tc, xc = EvalCtx(), EvalCtx()
            model.check(tc, u, bug)
            out = model.execute(xc, u, model.default_fuel, bug)
            syntax = syntax_checker(model.grammar)(None, u)
            for tree in trees:
                m = union_force(u, tree)
                assert m is not None, tree
                m = _complete(m, s.constants)
                assert concretize(u, m) == tree
                assert eval_formula(syntax, m)
                r = concrete_run(model, tree, model.default_fuel, bug)
                assert eval_formula(tc.holds(), m) == r.typechecks, tree
                if eval_formula(out.failure(), m):
                    got = "fail"
                elif eval_formula(out.out_of_fuel, m):
                    got = "out_of_fuel"
                else:
                    got = "ok"
                assert got == run_outcome(model, tree, model.default_fuel, bug), tree
