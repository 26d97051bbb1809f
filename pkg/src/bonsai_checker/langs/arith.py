"""Typed arithmetic: zero, succ, if and zero?.

Numbers evaluate to ints and booleans to the atoms ``#t``/``#f``.  The
``arith-if`` bug drops the check that both branches of an ``if`` have the
same type.
"""

from __future__ import annotations

from ..bonsai import pat, sym_leaf_map, to_sexpr, tree_eq, tree_match, leaf_eq
from ..symcore import CLeaf, EvalCtx
from .base import Crash, IllTyped, LangModel, Machine, grammar_file

BUG = "arith-if"
TRUE_V, FALSE_V = "#t", "#f"

_ZERO = pat("zero")
_SUCC = pat("(succ ?x)")
_IF = pat("(if ?c ?t ?f)")
_ISZERO = pat("(zero? ?x)")


def check(ctx: EvalCtx, t, bug: str | None = None):
    def go(t):
        def succ(x):
            ctx.assert_(leaf_eq(go(x), "nat"))
            return CLeaf("nat")

        def if_(c, th, el):
            ctx.assert_(leaf_eq(go(c), "bool"))
            t_ty = go(th)
            f_ty = go(el)
            if bug != BUG:
                ctx.assert_(tree_eq(t_ty, f_ty))
            return t_ty

        def iszero(x):
            ctx.assert_(leaf_eq(go(x), "nat"))
            return CLeaf("bool")

        return tree_match(
            ctx,
            t,
            [
                (_ZERO, lambda: CLeaf("nat")),
                (_SUCC, succ),
                (_IF, if_),
                (_ISZERO, iszero),
            ],
        )

    return go(t)


def execute(ctx: EvalCtx, t, fuel: int | None = None, bug: str | None = None):
    m = Machine(ctx)

    def go(t):
        def succ(x):
            return sym_leaf_map(
                ctx, go(x), lambda n: CLeaf(n + 1) if isinstance(n, int) else m.crash()
            )

        def if_(c, th, el):
            def branch(b):
                if b == TRUE_V:
                    return go(th)
                if b == FALSE_V:
                    return go(el)
                return m.crash()

            return sym_leaf_map(ctx, go(c), branch)

        def iszero(x):
            def test(n):
                if not isinstance(n, int):
                    return m.crash()
                return CLeaf(TRUE_V if n == 0 else FALSE_V)

            return sym_leaf_map(ctx, go(x), test)

        return tree_match(
            ctx,
            t,
            [
                (_ZERO, lambda: CLeaf(0)),
                (_SUCC, succ),
                (_IF, if_),
                (_ISZERO, iszero),
            ],
        )

    value = go(t)
    return m.outcome(value)


# -- concrete twins, written over plain s-expressions ----------------------


def concrete_check(tree, bug: str | None = None) -> str:
    def ty(e) -> str:
        if e == "zero":
            return "nat"
        if isinstance(e, tuple) and len(e) == 2 and e[0] == "succ":
            if ty(e[1]) != "nat":
                raise IllTyped("succ of non-nat")
            return "nat"
        if isinstance(e, tuple) and len(e) == 4 and e[0] == "if":
            if ty(e[1]) != "bool":
                raise IllTyped("if condition is not bool")
            a, b = ty(e[2]), ty(e[3])
            if bug != BUG and a != b:
                raise IllTyped("if branches differ")
            return a
        if isinstance(e, tuple) and len(e) == 2 and e[0] == "zero?":
            if ty(e[1]) != "nat":
                raise IllTyped("zero? of non-nat")
            return "bool"
        raise IllTyped(f"not a term: {e!r}")

    return ty(to_sexpr(tree))


def concrete_execute(tree, fuel: int | None = None, bug: str | None = None):
    def ev(e):
        if e == "zero":
            return 0
        head = e[0]
        if head == "succ":
            v = ev(e[1])
            if not isinstance(v, int):
                raise Crash(f"succ of {v}")
            return v + 1
        if head == "if":
            c = ev(e[1])
            if c == TRUE_V:
                return ev(e[2])
            if c == FALSE_V:
                return ev(e[3])
            raise Crash(f"if on {c}")
        if head == "zero?":
            v = ev(e[1])
            if not isinstance(v, int):
                raise Crash(f"zero? of {v}")
            return TRUE_V if v == 0 else FALSE_V
        raise Crash(f"not a term: {e!r}")

    return ev(to_sexpr(tree))


def model() -> LangModel:
    return LangModel(
        name="arith",
        grammar=grammar_file("arith"),
        check=check,
        execute=execute,
        concrete_check=concrete_check,
        concrete_execute=concrete_execute,
        bugs=(BUG,),
        default_depth=9,
        default_fuel=1,
    )
