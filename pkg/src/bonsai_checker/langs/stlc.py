"""Simply-typed lambda calculus with integer lists and nine injectable bugs.

Terms follow the Redex ``stlc+lists`` shape: ``(lambda (x T) M)``,
application ``(M N)``, variables ``a b c`` and the constants ``cons nil hd
tl + 0 1`` (all curried).  Types are trees built from the annotations:
``int``, ``(list int)`` and ``(A -> B)``.

The interpreter is environment based, call-by-value, left to right.
Runtime values are trees too::

    0, 1, 2 ...                      integers
    nil                              empty list
    hd tl cons +                     primitives
    (cons1 v) (plus1 v)              partial applications
    (cell h t)                       a full cons cell
    (clo x body env)                 closures

``(hd nil)`` and ``(tl nil)`` halt with a benign error, as in Redex.
Applying a closure costs one unit of fuel.

Bugs (each a single localized change), with the minimal witness size the
published catalogue reports in brackets:

    stlc-1  application checks the argument against the range       [5]
    stlc-2  a full cons cell is not a value when passed as argument  [9]
    stlc-3  application swaps domain and range                      [5]
    stlc-4  cons returns int instead of (list int)                   [17]
    stlc-5  tl returns the head of the cell                          [9]
    stlc-6  hd only reduces on a partially applied cons              [13]
    stlc-7  arguments that are applications are not evaluated        [5]
    stlc-8  variable lookup always yields int                        [21]
    stlc-9  variable lookup ignores names                            [15]
"""

from __future__ import annotations

from ..bonsai import Pair, Var, pat, sym_if, sym_leaf_map, test, to_sexpr, tree_eq, tree_match
from ..symcore import CLeaf, EvalCtx, mk_node
from .base import Crash, IllTyped, LangModel, Machine, OutOfFuel, RuntimeErrorValue, grammar_file

BUGS = tuple(f"stlc-{i}" for i in range(1, 10))
# Witnesses for these two need a deeper tree than the default of 5.
BUG_DEPTHS = {"stlc-5": 7, "stlc-8": 7}

PUBLISHED_SIZES = {  # first witness / minimized witness, from the catalogue
    "stlc-1": (5, 5),
    "stlc-2": (9, 9),
    "stlc-3": (5, 5),
    "stlc-4": (17, 17),
    "stlc-5": (9, 9),
    "stlc-6": (17, 13),
    "stlc-7": (9, 5),
    "stlc-8": (29, 21),
    "stlc-9": (15, 15),
}
NAMES = ("a", "b", "c")
PRIMS = ("hd", "tl", "cons", "+")
NUMS = {"0": 0, "1": 1}

_LAMBDA = pat("(lambda (?x ?ty) ?body)")
_APP = pat("(?f ?a)")
_ANY = Var("any")
_ARROW = pat("(?dom -> ?rng)")
_BINDING = Pair(Pair(Var("name"), Var("item")), Var("rest"))
_CLO = pat("(clo ?x ?body ?env)")
_CONS1 = pat("(cons1 ?v)")
_PLUS1 = pat("(plus1 ?v)")
_CELL = pat("(cell ?h ?t)")


def _leaf(a):
    return CLeaf(a)


def _list(*items):
    out = _leaf("nil")
    for x in reversed(items):
        out = mk_node(x, out)
    return out


def _arrow(a, b):
    return _list(a, _leaf("->"), b)


def _const_types(bug):
    i = _leaf("int")
    li = _list(_leaf("list"), _leaf("int"))
    return {
        "cons": _arrow(i, _arrow(li, i if bug == "stlc-4" else li)),
        "nil": li,
        "hd": _arrow(li, i),
        "tl": _arrow(li, li),
        "+": _arrow(i, _arrow(i, i)),
        "0": i,
        "1": i,
    }


# ---------------------------------------------------------------------------
# typechecker


def check(ctx: EvalCtx, t, bug: str | None = None):
    consts = _const_types(bug)
    fail = Machine(ctx).crash

    def lookup(env, x):
        def found(name, item, rest):
            if bug == "stlc-9":
                return item
            hit = item if bug != "stlc-8" else _leaf("int")
            return sym_if(ctx, tree_eq(name, x), lambda: hit, lambda: lookup(rest, x))

        return tree_match(ctx, env, [(_BINDING, found), (_ANY, lambda _: fail())])

    def go(t, env):
        def lam(x, ty, body):
            return _arrow(ty, go(body, mk_node(mk_node(x, ty), env)))

        def app(f, a):
            f_ty = go(f, env)
            a_ty = go(a, env)

            def arrow(dom, rng):
                if bug == "stlc-1":
                    ctx.assert_(tree_eq(rng, a_ty))
                    return rng
                if bug == "stlc-3":
                    ctx.assert_(tree_eq(rng, a_ty))
                    return dom
                ctx.assert_(tree_eq(dom, a_ty))
                return rng

            return tree_match(ctx, f_ty, [(_ARROW, arrow), (_ANY, lambda _: fail())])

        def atom(name):
            if name in NAMES:
                return lookup(env, _leaf(name))
            if name in consts:
                return consts[name]
            return fail()

        return tree_match(
            ctx,
            t,
            [
                (_LAMBDA, lam),
                (_APP, app),
                (_ANY, lambda leaf: sym_leaf_map(ctx, leaf, atom)),
            ],
        )

    return go(t, _leaf("nil"))


# ---------------------------------------------------------------------------
# interpreter


def execute(ctx: EvalCtx, t, fuel: int = 4, bug: str | None = None):
    m = Machine(ctx)

    def lookup(env, x):
        def found(name, item, rest):
            return sym_if(ctx, tree_eq(name, x), lambda: item, lambda: lookup(rest, x))

        return tree_match(ctx, env, [(_BINDING, found), (_ANY, lambda _: m.crash())])

    def is_cell(v):
        return test(_CELL, v)[0]

    def guard_cell(arg, then):
        # stlc-2: a full cell may only be consumed by hd/tl
        if bug != "stlc-2":
            return then()
        return sym_if(ctx, is_cell(arg), m.crash, then)

    def empty_or_crash(a):
        return m.error() if a == "nil" else m.crash()

    def apply(f, arg, fuel):
        def closure(x, body, env):
            def run():
                if fuel <= 0:
                    return m.out_of_fuel()
                return go(body, mk_node(mk_node(x, arg), env), fuel - 1)

            return guard_cell(arg, run)

        def cons1(v):
            return guard_cell(arg, lambda: _list(_leaf("cell"), v, arg))

        def plus1(v):
            def add(n):
                if not isinstance(n, int):
                    return m.crash()
                return sym_leaf_map(
                    ctx, arg, lambda k: _leaf(n + k) if isinstance(k, int) else m.crash()
                )

            return sym_leaf_map(ctx, v, add)

        def hd_of(arg):
            def cell(h, tl):
                return m.crash() if bug == "stlc-6" else h

            cases = [(_CELL, cell)]
            if bug == "stlc-6":
                cases.append((_CONS1, lambda h: h))
            cases.append((_ANY, lambda v: sym_leaf_map(ctx, v, empty_or_crash)))
            return tree_match(ctx, arg, cases)

        def tl_of(arg):
            def cell(h, tl):
                return h if bug == "stlc-5" else tl

            return tree_match(
                ctx,
                arg,
                [
                    (_CELL, cell),
                    (_ANY, lambda v: sym_leaf_map(ctx, v, empty_or_crash)),
                ],
            )

        def prim(a):
            if a == "hd":
                return hd_of(arg)
            if a == "tl":
                return tl_of(arg)
            if a == "cons":
                return guard_cell(arg, lambda: _list(_leaf("cons1"), arg))
            if a == "+":
                return guard_cell(arg, lambda: _list(_leaf("plus1"), arg))
            return m.crash()

        return tree_match(
            ctx,
            f,
            [
                (_CLO, closure),
                (_CONS1, cons1),
                (_PLUS1, plus1),
                (_ANY, lambda v: sym_leaf_map(ctx, v, prim)),
            ],
        )

    def go(t, env, fuel):
        def lam(x, ty, body):
            return _list(_leaf("clo"), x, body, env)

        def app(f, a):
            fv = go(f, env, fuel)
            if bug == "stlc-7":
                av = tree_match(
                    ctx,
                    a,
                    [(_LAMBDA, lambda *_: go(a, env, fuel)), (_APP, lambda *_: m.crash()), (_ANY, lambda _: go(a, env, fuel))],
                )
            else:
                av = go(a, env, fuel)
            return apply(fv, av, fuel)

        def atom(name):
            if name in NAMES:
                return lookup(env, _leaf(name))
            if name in NUMS:
                return _leaf(NUMS[name])
            if name == "nil" or name in PRIMS:
                return _leaf(name)
            return m.crash()

        return tree_match(
            ctx,
            t,
            [
                (_LAMBDA, lam),
                (_APP, app),
                (_ANY, lambda leaf: sym_leaf_map(ctx, leaf, atom)),
            ],
        )

    value = go(t, _leaf("nil"), fuel)
    return m.outcome(value)


# ---------------------------------------------------------------------------
# concrete twins over plain s-expressions


INT, LIST = "int", ("list", "int")


def _fn(a, b):
    return (a, "->", b)


def concrete_check(tree, bug: str | None = None):
    consts = {
        "cons": _fn(INT, _fn(LIST, INT if bug == "stlc-4" else LIST)),
        "nil": LIST,
        "hd": _fn(LIST, INT),
        "tl": _fn(LIST, LIST),
        "+": _fn(INT, _fn(INT, INT)),
        "0": INT,
        "1": INT,
    }

    def lookup(env, x):
        if not env:
            raise IllTyped(f"free variable {x}")
        if bug == "stlc-9":
            return env[0][1]
        for name, ty in env:
            if name == x:
                return INT if bug == "stlc-8" else ty
        raise IllTyped(f"free variable {x}")

    def ty(e, env):
        if isinstance(e, tuple) and len(e) == 3 and e[0] == "lambda":
            (x, t), body = e[1], e[2]
            return _fn(t, ty(body, [(x, t)] + env))
        if isinstance(e, tuple) and len(e) == 2:
            f, a = ty(e[0], env), ty(e[1], env)
            if not (isinstance(f, tuple) and len(f) == 3 and f[1] == "->"):
                raise IllTyped("applying a non-function")
            dom, rng = f[0], f[2]
            if bug in ("stlc-1", "stlc-3"):
                if rng != a:
                    raise IllTyped("argument mismatch")
                return rng if bug == "stlc-1" else dom
            if dom != a:
                raise IllTyped("argument mismatch")
            return rng
        if e in NAMES:
            return lookup(env, e)
        if e in consts:
            return consts[e]
        raise IllTyped(f"not a term: {e!r}")

    return ty(to_sexpr(tree), [])


def concrete_execute(tree, fuel: int = 4, bug: str | None = None):
    def is_cell(v):
        return isinstance(v, tuple) and v[0] == "cell"

    def apply(f, a, fuel):
        if bug == "stlc-2" and is_cell(a) and f not in ("hd", "tl"):
            raise Crash("cons cell passed as an argument")
        if isinstance(f, tuple) and f[0] == "clo":
            _, x, body, env = f
            if fuel <= 0:
                raise OutOfFuel()
            return ev(body, [(x, a)] + env, fuel - 1)
        if isinstance(f, tuple) and f[0] == "cons1":
            return ("cell", f[1], a)
        if isinstance(f, tuple) and f[0] == "plus1":
            if isinstance(f[1], int) and isinstance(a, int):
                return f[1] + a
            raise Crash("+ on a non-number")
        if f == "hd":
            if is_cell(a) and bug != "stlc-6":
                return a[1]
            if bug == "stlc-6" and isinstance(a, tuple) and a[0] == "cons1":
                return a[1]
            if a == "nil":
                raise RuntimeErrorValue("hd of nil")
            raise Crash("hd of a non-list")
        if f == "tl":
            if is_cell(a):
                return a[1] if bug == "stlc-5" else a[2]
            if a == "nil":
                raise RuntimeErrorValue("tl of nil")
            raise Crash("tl of a non-list")
        if f == "cons":
            return ("cons1", a)
        if f == "+":
            return ("plus1", a)
        raise Crash(f"applying {f!r}")

    def ev(e, env, fuel):
        if isinstance(e, tuple) and len(e) == 3 and e[0] == "lambda":
            return ("clo", e[1][0], e[2], env)
        if isinstance(e, tuple) and len(e) == 2:
            f = ev(e[0], env, fuel)
            arg = e[1]
            if bug == "stlc-7" and isinstance(arg, tuple) and not (len(arg) == 3 and arg[0] == "lambda"):
                raise Crash("argument is not a value")
            return apply(f, ev(arg, env, fuel), fuel)
        if e in NAMES:
            for name, v in env:
                if name == e:
                    return v
            raise Crash(f"unbound {e}")
        if e in NUMS:
            return NUMS[e]
        if e == "nil" or e in PRIMS:
            return e
        raise Crash(f"not a term: {e!r}")

    return ev(to_sexpr(tree), [], fuel)


def model() -> LangModel:
    return LangModel(
        name="stlc",
        grammar=grammar_file("stlc"),
        check=check,
        execute=execute,
        concrete_check=concrete_check,
        concrete_execute=concrete_execute,
        bugs=BUGS,
        default_depth=5,
        default_fuel=4,
        bug_depths=BUG_DEPTHS,
        notes={"published_sizes": PUBLISHED_SIZES},
    )
