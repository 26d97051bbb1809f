"""Symbolic Bonsai trees: construction, pattern matching, size, concretization.

Concrete trees are plain Python data: an atom is a leaf and a 2-tuple
``(left, right)`` is an inner node.  S-expressions embed as proper lists
terminated by the reserved atom ``nil``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Mapping, Sequence, Union

from . import sexpr as sx
from .symcore import (
    FAIL,
    FALSE,
    TRUE,
    CLeaf,
    EvalCtx,
    Formula,
    GLeaf,
    Ite,
    IntExpr,
    InvalidAtom,
    Node,
    SLeaf,
    SymConst,
    SymVal,
    _split,
    current_session,
    eval_formula,
    int_const,
    int_sum,
    ite_int,
    leaf_cases,
    merge,
    mk_and,
    mk_node,
    mk_not,
    mk_or,
)

NIL = "nil"
SHAPE_DOMAIN = ("leaf", "inner")

ConcreteTree = Union[Hashable, tuple]


class InvalidVocabulary(ValueError):
    pass


# ---------------------------------------------------------------------------
# patterns


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    atom: Hashable


@dataclass(frozen=True)
class Pair:
    left: "Pattern"
    right: "Pattern"


Pattern = Union[Var, Const, Pair]


def pattern_vars(p: Pattern) -> list[str]:
    if isinstance(p, Var):
        return [p.name]
    if isinstance(p, Pair):
        return pattern_vars(p.left) + pattern_vars(p.right)
    return []


def pat(template) -> Pattern:
    """Build a list pattern from an s-expression template.

    ``_`` is an anonymous variable, ``?x`` a named one, any other atom a
    constant; a tuple is a proper list.  Templates may also be text.
    """
    if isinstance(template, str) and any(ch in template for ch in "( )"):
        template = sx.parse(template)
    counter = iter(range(1 << 30))

    def build(t):
        if isinstance(t, (Var, Const, Pair)):
            return t
        if isinstance(t, tuple):
            out: Pattern = Const(NIL)
            for item in reversed([build(x) for x in t]):
                out = Pair(item, out)
            return out
        if t == "_":
            return Var(f"_{next(counter)}")
        if isinstance(t, str) and t.startswith("?"):
            return Var(t[1:])
        return Const(t)

    p = build(template)
    names = pattern_vars(p)
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate pattern variable in {template!r}")
    return p


MatchCase = tuple  # (Pattern, handler)


# ---------------------------------------------------------------------------
# equality on symbolic trees


def leaf_eq(v, atom) -> Formula:
    """Formula: ``v`` is the leaf ``atom``."""
    if v is FAIL:
        return FALSE
    if isinstance(v, CLeaf):
        return TRUE if v.atom == atom else FALSE
    if isinstance(v, SLeaf):
        c = v.const
        return current_session().mk_eq(c, atom) if atom in c.index else FALSE
    if isinstance(v, GLeaf):
        for a, g in v.cases:
            if a == atom:
                return g
        return FALSE
    if isinstance(v, Node):
        return FALSE
    if isinstance(v, Ite):
        return mk_and(v.cond, leaf_eq(v.leaf, atom))
    from .classic import union_leaf_eq

    return union_leaf_eq(v, atom)


def _leaves_eq(a: SymVal, b: SymVal) -> Formula:
    if isinstance(a, CLeaf):
        return leaf_eq(b, a.atom)
    if isinstance(b, CLeaf):
        return leaf_eq(a, b.atom)
    if isinstance(a, SLeaf) and isinstance(b, SLeaf) and a.const is b.const:
        return TRUE
    cb = dict(leaf_cases(b))
    return mk_or([mk_and(g, cb[x]) for x, g in leaf_cases(a) if x in cb])


def tree_eq(a, b, _memo: dict | None = None) -> Formula:
    """Formula: the two values denote the same concrete tree."""
    if a is FAIL or b is FAIL:
        return FALSE
    if a is b:
        return TRUE
    if not isinstance(a, SymVal) or not isinstance(b, SymVal):
        from .classic import union_tree_eq

        return union_tree_eq(a, b)
    memo = {} if _memo is None else _memo
    key = (id(a), id(b))
    if key in memo:
        return memo[key][2]
    phi, la, na = _split(a)
    psi, lb, nb = _split(b)
    parts = []
    if la is not None and lb is not None:
        parts.append(mk_and(phi, psi, _leaves_eq(la, lb)))
    if na is not None and nb is not None:
        parts.append(
            mk_and(
                mk_not(phi),
                mk_not(psi),
                tree_eq(na.left, nb.left, memo),
                tree_eq(na.right, nb.right, memo),
            )
        )
    out = mk_or(parts)
    memo[key] = (a, b, out)  # operands kept alive so their ids stay unique
    return out


# ---------------------------------------------------------------------------
# construction


def fresh_tree(ctx: EvalCtx | None, depth: int, vocab: Sequence) -> SymVal:
    """A symbolic tree embedding every concrete tree of depth <= ``depth``."""
    vocab = tuple(vocab)
    if not vocab:
        raise InvalidVocabulary("vocabulary must be non-empty")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    s = current_session()

    def build(d: int) -> SymVal:
        if d == 0:
            return SLeaf(s.fresh_const(vocab))
        shape = s.fresh_const(SHAPE_DOMAIN)
        leaf = SLeaf(s.fresh_const(vocab))
        left = build(d - 1)
        right = build(d - 1)
        return Ite(s.mk_eq(shape, "leaf"), leaf, Node(left, right))

    return build(depth)


def tree_constants(t) -> list[SymConst]:
    """Every constant referenced by the value's leaves and guards."""
    from .symcore import formula_constants

    guards = []
    found = {}
    stack = [t]
    while stack:
        v = stack.pop()
        if isinstance(v, SLeaf):
            found[v.const.id] = v.const
        elif isinstance(v, GLeaf):
            guards.extend(g for _, g in v.cases)
        elif isinstance(v, Node):
            stack.extend((v.left, v.right))
        elif isinstance(v, Ite):
            guards.append(v.cond)
            stack.extend((v.leaf, v.node))
    for c in formula_constants(guards):
        found[c.id] = c
    return [found[i] for i in sorted(found)]


# ---------------------------------------------------------------------------
# matching


def test(pattern: Pattern, t) -> tuple[Formula, list]:
    """Match condition and left-to-right bindings of ``pattern`` on ``t``.

    Never branches: on an ``Ite`` the pattern's own shape picks the leaf or
    the node side.
    """
    binds: list = []

    def go(p: Pattern, v) -> Formula:
        if isinstance(p, Var):
            binds.append(v)
            return TRUE
        if isinstance(p, Const):
            return leaf_eq(v, p.atom)
        if isinstance(v, Node):
            cl = go(p.left, v.left)
            if cl is FALSE:
                _skip(p.right)
                return FALSE
            return mk_and(cl, go(p.right, v.right))
        if isinstance(v, Ite):
            return mk_and(mk_not(v.cond), go(p, v.node))
        _skip(p)
        return FALSE

    def _skip(p: Pattern) -> None:
        binds.extend(FAIL for _ in pattern_vars(p))

    cond = go(pattern, t)
    return cond, binds


def tree_match(ctx: EvalCtx, t, cases: Sequence[MatchCase]):
    """Ordered pattern match; results of all feasible cases are merged.

    The case at index i runs under the current path conjoined with its own
    match condition and the negation of every earlier one.  When no case
    can match, the remaining condition is asserted false.
    """
    if t is FAIL:
        return FAIL
    if not isinstance(t, SymVal):
        from .classic import union_match

        return union_match(ctx, t, cases)
    s = current_session()
    outer = ctx.path
    remaining = TRUE
    results = []
    for pattern, handler in cases:
        s.bump("pattern_tests")
        cond, binds = test(pattern, t)
        guard = s.mk_and(remaining, cond)
        remaining = s.mk_and(remaining, s.mk_not(cond))
        if guard is not FALSE:
            path = s.mk_and(outer, guard)
            if path is not FALSE:
                ctx.path = path
                try:
                    r = handler(*binds)
                finally:
                    ctx.path = outer
                results.append((guard, r))
        if remaining is FALSE:
            break
    if remaining is not FALSE:
        ctx.assert_(s.mk_not(remaining))
    return merge_guarded(results)


def merge_guarded(results: Sequence[tuple]):
    """Merge ``[(guard, value), ...]`` with earlier guards taking priority."""
    out = FAIL
    for guard, r in reversed(results):
        if isinstance(r, Formula):
            out = r if out is FAIL else current_session().mk_ite(guard, r, out)
        else:
            out = merge(guard, r, out)
    return out


def sym_if(ctx: EvalCtx, cond: Formula, then: Callable, other: Callable):
    """Branch on a symbolic condition, evaluate both feasible arms, merge."""
    if cond is TRUE:
        return then()
    if cond is FALSE:
        return other()
    s = current_session()
    outer = ctx.path
    results = []
    for guard, arm in ((cond, then), (s.mk_not(cond), other)):
        path = s.mk_and(outer, guard)
        if path is FALSE:
            continue
        ctx.path = path
        try:
            results.append((guard, arm()))
        finally:
            ctx.path = outer
    if not results:
        return FAIL
    return merge_guarded(results)


def sym_leaf_map(ctx: EvalCtx, v, fn: Callable):
    """Apply ``fn(atom)`` to each possible atom of a leaf-shaped value.

    ``fn`` runs under the path restricted to that atom and may assert.
    Inner-node possibilities are sent to ``fn(None)``.
    """
    if v is FAIL:
        return FAIL
    if not isinstance(v, SymVal):
        from .classic import union_leaf_map

        return union_leaf_map(ctx, v, fn)
    s = current_session()
    phi, leaf, node = _split(v)
    alts = []
    if leaf is not None:
        alts.extend((mk_and(phi, g), a) for a, g in leaf_cases(leaf))
    if node is not None:
        alts.append((mk_not(phi), None))
    outer = ctx.path
    results = []
    for guard, atom in alts:
        path = s.mk_and(outer, guard)
        if path is FALSE:
            continue
        ctx.path = path
        try:
            results.append((guard, fn(atom)))
        finally:
            ctx.path = outer
    return merge_guarded(results)


# ---------------------------------------------------------------------------
# size


def symbolic_size(t: SymVal) -> IntExpr:
    """Redex size of the concretization as a symbolic integer.

    Atoms and lists count one each; a ``nil`` closing a list counts zero.
    """

    def size(v: SymVal, tail: bool) -> IntExpr:
        phi, leaf, node = _split(v)
        leaf_size = node_size = None
        if leaf is not None:
            leaf_size = ite_int(leaf_eq(leaf, NIL), int_const(0), int_const(1)) if tail else int_const(1)
        if node is not None:
            node_size = int_sum(
                [int_const(0 if tail else 1), size(node.left, False), size(node.right, True)]
            )
        if leaf_size is None:
            return node_size
        if node_size is None:
            return leaf_size
        return ite_int(phi, leaf_size, node_size)

    return size(t, False)


def redex_size(c: ConcreteTree) -> int:
    def size(x, tail: bool) -> int:
        if is_cnode(x):
            return (0 if tail else 1) + size(x[0], False) + size(x[1], True)
        return 0 if (tail and x == NIL) else 1

    return size(c, False)


def tree_depth(c: ConcreteTree) -> int:
    if is_cnode(c):
        return 1 + max(tree_depth(c[0]), tree_depth(c[1]))
    return 0


# ---------------------------------------------------------------------------
# concrete trees


def is_cnode(x) -> bool:
    return isinstance(x, tuple)


def concretize(t, model: Mapping[SymConst, Hashable], _cache: dict | None = None):
    """The concrete tree ``t`` denotes under ``model`` (or FAIL)."""
    cache = {} if _cache is None else _cache
    if not isinstance(t, SymVal):
        from .classic import union_concretize

        return union_concretize(t, model, cache)

    def go(v):
        while isinstance(v, Ite):
            v = v.leaf if eval_formula(v.cond, model, cache) else v.node
        if v is FAIL:
            return FAIL
        if isinstance(v, CLeaf):
            return v.atom
        if isinstance(v, SLeaf):
            return model[v.const]
        if isinstance(v, GLeaf):
            for a, g in v.cases:
                if eval_formula(g, model, cache):
                    return a
            return FAIL
        left = go(v.left)
        right = go(v.right)
        if left is FAIL or right is FAIL:
            return FAIL
        return (left, right)

    return go(t)


def embed_sexpr(s, vocab: Iterable | None = None) -> ConcreteTree:
    """Proper-list embedding: ``(a b)`` becomes ``(a, (b, nil))``."""
    if isinstance(s, str) and (s.startswith("'") or "(" in s or " " in s):
        s = sx.parse(s)
    allowed = None if vocab is None else set(vocab) | {NIL}

    def go(x):
        if isinstance(x, tuple):
            out = NIL
            for item in reversed(x):
                out = (go(item), out)
            return out
        if allowed is not None and x not in allowed:
            raise InvalidAtom(f"{x!r} is not in the vocabulary")
        return x

    return go(s)


def to_sexpr(c: ConcreteTree):
    """Inverse of :func:`embed_sexpr`; returns None for improper lists."""
    if not is_cnode(c):
        return c
    items = []
    while is_cnode(c):
        sub = to_sexpr(c[0])
        if sub is None:
            return None
        items.append(sub)
        c = c[1]
    if c != NIL:
        return None
    return tuple(items)


def const_tree(c: ConcreteTree) -> SymVal:
    """A concrete tree as a symbolic value with no constants."""
    if is_cnode(c):
        return mk_node(const_tree(c[0]), const_tree(c[1]))
    return CLeaf(c)


def render_sexpr(c: ConcreteTree) -> str:
    if not is_cnode(c):
        return str(c)
    items = []
    while is_cnode(c):
        items.append(render_sexpr(c[0]))
        c = c[1]
    if c == NIL:
        return "(" + " ".join(items) + ")"
    return "(" + " ".join(items) + " . " + str(c) + ")"


def parse_program(text: str, vocab: Iterable | None = None) -> ConcreteTree:
    return embed_sexpr(sx.parse(text), vocab)


def force(t: SymVal, c: ConcreteTree) -> dict:
    """A model under which the fresh tree ``t`` concretizes to ``c``.

    Raises ValueError when ``c`` does not fit in ``t``.  Constants not
    needed for ``c`` get the first atom of their domain.
    """
    model: dict = {}

    def go(v, x):
        if isinstance(v, SLeaf):
            if is_cnode(x) or x not in v.const.index:
                raise ValueError(f"{x!r} does not fit")
            model[v.const] = x
            return
        if isinstance(v, Ite):
            shape, leaf = _fresh_ite_parts(v)
            if is_cnode(x):
                model[shape] = "inner"
                fill(leaf)
                go(v.node.left, x[0])
                go(v.node.right, x[1])
            else:
                model[shape] = "leaf"
                go(leaf, x)
                fill(v.node)
            return
        raise ValueError("force expects a tree built by fresh_tree")

    def fill(v):
        if isinstance(v, SLeaf):
            model.setdefault(v.const, v.const.domain[0])
        elif isinstance(v, Ite):
            shape, leaf = _fresh_ite_parts(v)
            model.setdefault(shape, "leaf")
            fill(leaf)
            fill(v.node)
        elif isinstance(v, Node):
            fill(v.left)
            fill(v.right)

    go(t, c)
    return model


def _fresh_ite_parts(v: Ite):
    cond = v.cond
    if cond.kind != 2 or not isinstance(v.leaf, SLeaf):
        raise ValueError("force expects a tree built by fresh_tree")
    return cond.args[0], v.leaf


def all_models(consts: Sequence[SymConst]):
    """Every total assignment over ``consts`` (exponential; tests only)."""
    import itertools

    for values in itertools.product(*(c.domain for c in consts)):
        yield dict(zip(consts, values))


# ---------------------------------------------------------------------------
# concrete matching (used by the concrete twins of the language models)


def cmatch(pattern: Pattern, tree: ConcreteTree):
    """Bindings list when ``pattern`` matches the concrete ``tree``, else None."""
    binds: list = []

    def go(p, x) -> bool:
        if isinstance(p, Var):
            binds.append(x)
            return True
        if isinstance(p, Const):
            return not is_cnode(x) and x == p.atom
        return is_cnode(x) and go(p.left, x[0]) and go(p.right, x[1])

    return binds if go(pattern, tree) else None


class NoMatch(Exception):
    pass


def concrete_match(tree: ConcreteTree, cases: Sequence[MatchCase]):
    for pattern, handler in cases:
        binds = cmatch(pattern, tree)
        if binds is not None:
            return handler(*binds)
    raise NoMatch(render_sexpr(tree))
