"""A toy language of pairs: ``a``, ``(swap x y)`` and ``(id x)``.

``rewrite`` is the single match from the worked example (on bare pairs,
``[swap, [x, y]]`` and ``[id, x]``); the model itself uses the list
encoding and never fails.
"""

from __future__ import annotations

from ..bonsai import Const, Pair, Var, pat, to_sexpr, tree_match
from ..symcore import CLeaf, EvalCtx, mk_node
from .base import IllTyped, LangModel, Machine, grammar_file

REWRITE_CASES = (
    (Const("a"), lambda: CLeaf("a")),
    (Pair(Const("swap"), Pair(Var("x"), Var("y"))), lambda x, y: mk_node(CLeaf("swap"), mk_node(y, x))),
    (Pair(Const("id"), Var("x")), lambda x: x),
)


def rewrite(ctx: EvalCtx, t):
    return tree_match(ctx, t, REWRITE_CASES)


_SWAP = pat("(swap ?x ?y)")
_ID = pat("(id ?x)")
_A = pat("a")


def _build(swap_args):
    x, y = swap_args
    return mk_node(CLeaf("swap"), mk_node(x, mk_node(y, CLeaf("nil"))))


def check(ctx: EvalCtx, t, bug: str | None = None):
    def go(t):
        return tree_match(
            ctx,
            t,
            [
                (_A, lambda: CLeaf("ok")),
                (_SWAP, lambda x, y: (go(x), go(y), CLeaf("ok"))[-1]),
                (_ID, lambda x: go(x)),
            ],
        )

    return go(t)


def execute(ctx: EvalCtx, t, fuel: int = 1, bug: str | None = None):
    m = Machine(ctx)

    def go(t):
        return tree_match(
            ctx,
            t,
            [
                (_A, lambda: CLeaf("a")),
                (_SWAP, lambda x, y: _build((go(y), go(x)))),
                (_ID, lambda x: go(x)),
            ],
        )

    return m.outcome(go(t))


def concrete_check(tree, bug: str | None = None):
    def go(e):
        if e == "a":
            return "ok"
        if isinstance(e, tuple) and len(e) == 3 and e[0] == "swap":
            go(e[1])
            go(e[2])
            return "ok"
        if isinstance(e, tuple) and len(e) == 2 and e[0] == "id":
            return go(e[1])
        raise IllTyped(repr(e))

    return go(to_sexpr(tree))


def concrete_execute(tree, fuel: int = 1, bug: str | None = None):
    from ..bonsai import embed_sexpr

    def go(e):
        if e == "a":
            return "a"
        if e[0] == "swap":
            return ("swap", go(e[2]), go(e[1]))
        return go(e[1])

    return embed_sexpr(go(to_sexpr(tree)))


def model() -> LangModel:
    return LangModel(
        name="mini",
        grammar=grammar_file("mini"),
        check=check,
        execute=execute,
        concrete_check=concrete_check,
        concrete_execute=concrete_execute,
        bugs=(),
        default_depth=4,
        default_fuel=1,
    )
