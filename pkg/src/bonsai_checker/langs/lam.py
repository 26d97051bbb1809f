"""Untyped lambda calculus for the encoding-scalability benchmark.

The "typechecker" only rejects free variables and the interpreter is a
recursive descent whose nesting is bounded by fuel (every recursive call
spends one unit), so a closed program can never get stuck: the soundness
query is unsat at every depth.  That makes it a pure measure of how the
tree encoding scales.
"""

from __future__ import annotations

from ..bonsai import pat, sym_if, sym_leaf_map, to_sexpr, tree_eq, tree_match
from ..symcore import CLeaf, EvalCtx, mk_node, mk_or
from .base import Crash, IllTyped, LangModel, Machine, OutOfFuel, grammar_file
from .stlc import _BINDING, _ANY

NAMES = ("a", "b", "c")
_LAMBDA = pat("(lambda ?x ?body)")
_APP = pat("(?f ?a)")
_CLO = pat("(clo ?x ?body ?env)")


def check(ctx: EvalCtx, t, bug: str | None = None):
    fail = Machine(ctx).crash

    def go(t, scope):
        def atom(name):
            if name not in NAMES:
                return fail()
            ctx.assert_(mk_or([tree_eq(x, CLeaf(name)) for x in scope]))
            return CLeaf("ok")

        def app(f, a):
            go(f, scope)
            go(a, scope)
            return CLeaf("ok")

        return tree_match(
            ctx,
            t,
            [
                (_LAMBDA, lambda x, body: go(body, scope + [x])),
                (_APP, app),
                (_ANY, lambda leaf: sym_leaf_map(ctx, leaf, atom)),
            ],
        )

    return go(t, [])


def execute(ctx: EvalCtx, t, fuel: int = 4, bug: str | None = None):
    m = Machine(ctx)

    def lookup(env, x):
        def found(name, item, rest):
            return sym_if(ctx, tree_eq(name, x), lambda: item, lambda: lookup(rest, x))

        return tree_match(ctx, env, [(_BINDING, found), (_ANY, lambda _: m.crash())])

    def go(t, env, fuel):
        if fuel <= 0:
            return m.out_of_fuel()

        def app(f, a):
            fv = go(f, env, fuel - 1)
            av = go(a, env, fuel - 1)

            def enter(x, body, cenv):
                return go(body, mk_node(mk_node(x, av), cenv), fuel - 1)

            return tree_match(ctx, fv, [(_CLO, enter), (_ANY, lambda _: m.crash())])

        def atom(name):
            if name not in NAMES:
                return m.crash()
            return lookup(env, CLeaf(name))

        return tree_match(
            ctx,
            t,
            [
                (_LAMBDA, lambda x, body: mk_node(CLeaf("clo"), mk_node(x, mk_node(body, mk_node(env, CLeaf("nil")))))),
                (_APP, app),
                (_ANY, lambda leaf: sym_leaf_map(ctx, leaf, atom)),
            ],
        )

    return m.outcome(go(t, CLeaf("nil"), fuel))


def concrete_check(tree, bug: str | None = None):
    def go(e, scope):
        if isinstance(e, tuple) and len(e) == 3 and e[0] == "lambda":
            go(e[2], scope | {e[1]})
        elif isinstance(e, tuple) and len(e) == 2:
            go(e[0], scope)
            go(e[1], scope)
        elif e not in scope:
            raise IllTyped(f"free variable {e!r}")
        return "ok"

    return go(to_sexpr(tree), frozenset())


def concrete_execute(tree, fuel: int = 4, bug: str | None = None):
    def ev(e, env, fuel):
        if fuel <= 0:
            raise OutOfFuel()
        if isinstance(e, tuple) and len(e) == 3 and e[0] == "lambda":
            return ("clo", e[1], e[2], env)
        if isinstance(e, tuple) and len(e) == 2:
            f = ev(e[0], env, fuel - 1)
            a = ev(e[1], env, fuel - 1)
            if not (isinstance(f, tuple) and f[0] == "clo"):
                raise Crash("applying a non-closure")
            return ev(f[2], [(f[1], a)] + f[3], fuel - 1)
        for name, v in env:
            if name == e:
                return v
        raise Crash(f"unbound {e!r}")

    return ev(to_sexpr(tree), [], fuel)


def model() -> LangModel:
    return LangModel(
        name="lam",
        grammar=grammar_file("lam"),
        check=check,
        execute=execute,
        concrete_check=concrete_check,
        concrete_execute=concrete_execute,
        bugs=(),
        default_depth=4,
        default_fuel=4,
    )
