"""Hash-consed formulas, finite-domain constants and symbolic tree values.

A :class:`Session` owns the constant allocator and the hash-cons table.
Formula constructors (``mk_and`` and friends) operate on the session that
is current in the calling context; use ``with Session():`` to isolate one.

Symbolic values follow one shape rule: every :class:`Ite` has a
leaf-shaped true branch and a :class:`Node` false branch.  Merging two leaf
values never builds an ``Ite``; it yields a :class:`GLeaf`, a flat map from
atom to guard.
"""

from __future__ import annotations

import contextvars
import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

Atom = Hashable


class InvalidDomain(ValueError):
    pass


class InvalidAtom(ValueError):
    pass


class IncompleteModel(KeyError):
    pass


# ---------------------------------------------------------------------------
# constants and formulas


class SymConst:
    __slots__ = ("id", "domain", "index", "name")

    def __init__(self, id: int, domain: tuple, name: str | None = None):
        self.id = id
        self.domain = domain
        self.index = {a: i for i, a in enumerate(domain)}
        self.name = name or f"c{id}"

    def __repr__(self) -> str:
        return f"<{self.name}:{len(self.domain)}>"


TRUE_K, FALSE_K, EQ_K, NOT_K, AND_K, OR_K, IMP_K = range(7)
_KIND_NAMES = ("true", "false", "eq", "not", "and", "or", "=>")


class Formula:
    """An interned formula node.  Compare with ``is``."""

    __slots__ = ("kind", "args", "id", "__weakref__")

    def __init__(self, kind: int, args: tuple, id: int):
        self.kind = kind
        self.args = args
        self.id = id

    @property
    def is_true(self) -> bool:
        return self.kind == TRUE_K

    @property
    def is_false(self) -> bool:
        return self.kind == FALSE_K

    def __repr__(self) -> str:
        if self.kind == TRUE_K:
            return "T"
        if self.kind == FALSE_K:
            return "F"
        if self.kind == EQ_K:
            c, i = self.args
            return f"({c.name}={c.domain[i]!r})"
        return "(" + _KIND_NAMES[self.kind] + " " + " ".join(map(repr, self.args)) + ")"


TRUE = Formula(TRUE_K, (), 0)
FALSE = Formula(FALSE_K, (), 1)


class Session:
    """Constant allocator, hash-cons table and instrumentation counters."""

    def __init__(self, encoding: str = "bonsai") -> None:
        if encoding not in ("bonsai", "classic"):
            raise ValueError(f"unknown encoding {encoding!r}")
        self.encoding = encoding
        self._ids = itertools.count(2)
        self._const_ids = itertools.count(0)
        self._table: dict[tuple, Formula] = {}
        self.constants: list[SymConst] = []
        self.counters: dict[str, int] = {}
        self._token = None

    def __enter__(self) -> "Session":
        self._token = _current.set(self)
        return self

    def __exit__(self, *exc) -> None:
        _current.reset(self._token)
        self._token = None

    def bump(self, key: str, n: int = 1) -> None:
        self.counters[key] = self.counters.get(key, 0) + n

    # -- constants --------------------------------------------------------

    def fresh_const(self, domain: Iterable[Atom], name: str | None = None) -> SymConst:
        dom = tuple(domain)
        if not dom:
            raise InvalidDomain("domain must be non-empty")
        if len(set(dom)) != len(dom):
            raise InvalidDomain(f"domain has duplicates: {dom!r}")
        c = SymConst(next(self._const_ids), dom, name)
        self.constants.append(c)
        return c

    # -- interning --------------------------------------------------------

    def _intern(self, kind: int, args: tuple, key: tuple) -> Formula:
        f = self._table.get(key)
        if f is None:
            f = Formula(kind, args, next(self._ids))
            self._table[key] = f
        return f

    @property
    def formula_count(self) -> int:
        return len(self._table)

    def mk_eq(self, c: SymConst, a: Atom) -> Formula:
        try:
            i = c.index[a]
        except (KeyError, TypeError):
            raise InvalidAtom(f"{a!r} is not in the domain of {c!r}") from None
        if len(c.domain) == 1:
            return TRUE
        return self._intern(EQ_K, (c, i), (EQ_K, c.id, i))

    def mk_not(self, f: Formula) -> Formula:
        k = f.kind
        if k == TRUE_K:
            return FALSE
        if k == FALSE_K:
            return TRUE
        if k == NOT_K:
            return f.args[0]
        return self._intern(NOT_K, (f,), (NOT_K, f.id))

    def _nary(self, kind: int, fs: Iterable[Formula]) -> Formula:
        unit, zero = (TRUE, FALSE) if kind == AND_K else (FALSE, TRUE)
        seen: dict[int, Formula] = {}
        stack = list(fs)
        stack.reverse()
        while stack:
            f = stack.pop()
            if f is unit:
                continue
            if f is zero:
                return zero
            if f.kind == kind:
                stack.extend(reversed(f.args))
                continue
            seen[f.id] = f
        if not seen:
            return unit
        for f in seen.values():
            if f.kind == NOT_K and f.args[0].id in seen:
                return zero
        if len(seen) == 1:
            return next(iter(seen.values()))
        ids = tuple(sorted(seen))
        args = tuple(seen[i] for i in ids)
        return self._intern(kind, args, (kind,) + ids)

    def mk_and(self, *fs: Formula) -> Formula:
        return self._nary(AND_K, _flat_args(fs))

    def mk_or(self, *fs: Formula) -> Formula:
        return self._nary(OR_K, _flat_args(fs))

    def mk_implies(self, a: Formula, b: Formula) -> Formula:
        if a is TRUE:
            return b
        if a is FALSE or b is TRUE or a is b:
            return TRUE
        if b is FALSE:
            return self.mk_not(a)
        if (a.kind == NOT_K and a.args[0] is b) or (b.kind == NOT_K and b.args[0] is a):
            return b
        return self._intern(IMP_K, (a, b), (IMP_K, a.id, b.id))

    def mk_ite(self, c: Formula, a: Formula, b: Formula) -> Formula:
        """Boolean if-then-else, expressed with and/or/not."""
        if c is TRUE or a is b:
            return a
        if c is FALSE:
            return b
        return self.mk_or(self.mk_and(c, a), self.mk_and(self.mk_not(c), b))


def _flat_args(fs: tuple) -> Iterable[Formula]:
    if len(fs) == 1 and not isinstance(fs[0], Formula):
        return fs[0]
    return fs


_default_session = Session()
_current: contextvars.ContextVar[Session] = contextvars.ContextVar(
    "bonsai_session", default=_default_session
)


def current_session() -> Session:
    return _current.get()


def fresh_const(domain: Iterable[Atom], name: str | None = None) -> SymConst:
    return current_session().fresh_const(domain, name)


def mk_eq(c: SymConst, a: Atom) -> Formula:
    return current_session().mk_eq(c, a)


def mk_not(f: Formula) -> Formula:
    return current_session().mk_not(f)


def mk_and(*fs) -> Formula:
    return current_session().mk_and(*fs)


def mk_or(*fs) -> Formula:
    return current_session().mk_or(*fs)


def mk_implies(a: Formula, b: Formula) -> Formula:
    return current_session().mk_implies(a, b)


def mk_ite(c: Formula, a: Formula, b: Formula) -> Formula:
    return current_session().mk_ite(c, a, b)


def postorder(roots: Iterable) -> Iterator:
    """Yield every DAG node below ``roots`` once, children first.

    Works for formulas and :class:`IntExpr` nodes alike; children are read
    from ``node.args`` and only entries that themselves have ``args`` are
    followed.
    """
    seen: set[int] = set()
    for root in roots:
        if id(root) in seen:
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                yield node
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for child in reversed(_children(node)):
                if id(child) not in seen:
                    stack.append((child, False))


def _children(node) -> tuple:
    if isinstance(node, Formula):
        return () if node.kind <= EQ_K else node.args
    return node.args


def formula_constants(roots: Iterable) -> list[SymConst]:
    """Constants occurring in the given formulas / integer expressions, by id."""
    found: dict[int, SymConst] = {}
    for node in postorder(roots):
        if isinstance(node, Formula) and node.kind == EQ_K:
            c = node.args[0]
            found[c.id] = c
    return [found[i] for i in sorted(found)]


def eval_formula(f: Formula, model: Mapping[SymConst, Atom], _cache: dict | None = None) -> bool:
    cache = {} if _cache is None else _cache
    for node in postorder([f]):
        if node.id in cache:
            continue
        k = node.kind
        if k == TRUE_K:
            v = True
        elif k == FALSE_K:
            v = False
        elif k == EQ_K:
            c, i = node.args
            try:
                v = model[c] == c.domain[i]
            except KeyError:
                raise IncompleteModel(c) from None
        elif k == NOT_K:
            v = not cache[node.args[0].id]
        elif k == AND_K:
            v = all(cache[a.id] for a in node.args)
        elif k == OR_K:
            v = any(cache[a.id] for a in node.args)
        else:
            v = (not cache[node.args[0].id]) or cache[node.args[1].id]
        cache[node.id] = v
    return cache[f.id]


# ---------------------------------------------------------------------------
# integer expressions (size objectives)


class IntExpr:
    __slots__ = ("args",)
    args: tuple


class IntConst(IntExpr):
    __slots__ = ("value",)

    def __init__(self, value: int):
        self.value = value
        self.args = ()

    def __repr__(self) -> str:
        return str(self.value)


class IteInt(IntExpr):
    __slots__ = ("cond",)

    def __init__(self, cond: Formula, then: IntExpr, other: IntExpr):
        self.cond = cond
        self.args = (then, other)

    def __repr__(self) -> str:
        return f"(ite {self.cond!r} {self.args[0]!r} {self.args[1]!r})"


class Sum(IntExpr):
    __slots__ = ()

    def __init__(self, terms: Sequence[IntExpr]):
        self.args = tuple(terms)

    def __repr__(self) -> str:
        return "(+ " + " ".join(map(repr, self.args)) + ")"


def int_const(n: int) -> IntExpr:
    return IntConst(n)


def ite_int(cond: Formula, a: IntExpr, b: IntExpr) -> IntExpr:
    if cond is TRUE or a is b:
        return a
    if cond is FALSE:
        return b
    if isinstance(a, IntConst) and isinstance(b, IntConst) and a.value == b.value:
        return a
    return IteInt(cond, a, b)


def int_sum(terms: Iterable[IntExpr]) -> IntExpr:
    consts = 0
    rest = []
    for t in terms:
        if isinstance(t, IntConst):
            consts += t.value
        elif isinstance(t, Sum):
            rest.extend(t.args)
        else:
            rest.append(t)
    if not rest:
        return IntConst(consts)
    if consts:
        rest.append(IntConst(consts))
    if len(rest) == 1:
        return rest[0]
    return Sum(rest)


def int_formulas(e: IntExpr) -> list[Formula]:
    return [n.cond for n in postorder([e]) if isinstance(n, IteInt)]


def eval_int(e: IntExpr, model: Mapping[SymConst, Atom]) -> int:
    fcache: dict = {}
    values: dict[int, int] = {}
    for node in postorder([e]):
        if isinstance(node, IntConst):
            values[id(node)] = node.value
        elif isinstance(node, IteInt):
            branch = node.args[0] if eval_formula(node.cond, model, fcache) else node.args[1]
            values[id(node)] = values[id(branch)]
        else:
            values[id(node)] = sum(values[id(a)] for a in node.args)
    return values[id(e)]


# ---------------------------------------------------------------------------
# symbolic values


class SymVal:
    __slots__ = ()
    is_leaf = False


class CLeaf(SymVal):
    __slots__ = ("atom",)
    is_leaf = True

    def __init__(self, atom: Atom):
        self.atom = atom

    def __repr__(self) -> str:
        return f"{self.atom}"


class SLeaf(SymVal):
    __slots__ = ("const",)
    is_leaf = True

    def __init__(self, const: SymConst):
        self.const = const

    def __repr__(self) -> str:
        return f"~{self.const.name}"


class GLeaf(SymVal):
    """A leaf chosen among atoms by pairwise-disjoint guards."""

    __slots__ = ("cases",)
    is_leaf = True

    def __init__(self, cases: tuple):
        self.cases = cases

    def __repr__(self) -> str:
        return "{" + ", ".join(f"{g!r}->{a}" for a, g in self.cases) + "}"


class Node(SymVal):
    """Inner node.  A node built by ``merge`` joins its children on first access."""

    __slots__ = ("_left", "_right", "_pending")

    def __init__(self, left: SymVal, right: SymVal):
        self._left = left
        self._right = right
        self._pending = None

    @classmethod
    def joined(cls, pi: Formula, a: "Node", b: "Node") -> "Node":
        n = cls.__new__(cls)
        n._pending = (pi, a, b)
        return n

    def _force(self) -> None:
        pi, a, b = self._pending
        self._left = merge(pi, a.left, b.left)
        self._right = merge(pi, a.right, b.right)
        self._pending = None

    @property
    def left(self) -> SymVal:
        if self._pending is not None:
            self._force()
        return self._left

    @property
    def right(self) -> SymVal:
        if self._pending is not None:
            self._force()
        return self._right

    def __repr__(self) -> str:
        return f"[{self.left!r}, {self.right!r}]"


class Ite(SymVal):
    """Leaf when ``cond`` holds, otherwise the inner node ``node``."""

    __slots__ = ("cond", "leaf", "node")

    def __init__(self, cond: Formula, leaf: SymVal, node: Node):
        self.cond = cond
        self.leaf = leaf
        self.node = node

    def __repr__(self) -> str:
        return f"ite({self.cond!r}, {self.leaf!r}, {self.node!r})"


class _Fail(SymVal):
    __slots__ = ()

    def __repr__(self) -> str:
        return "fail"


FAIL = _Fail()


def leaf_cases(v: SymVal) -> tuple:
    """``((atom, guard), ...)`` for a leaf-shaped value."""
    if isinstance(v, CLeaf):
        return ((v.atom, TRUE),)
    if isinstance(v, SLeaf):
        c = v.const
        return tuple((a, mk_eq(c, a)) for a in c.domain)
    if isinstance(v, GLeaf):
        return v.cases
    raise TypeError(f"not a leaf: {v!r}")


def make_leaf(cases: Iterable[tuple]) -> SymVal:
    """Build the simplest leaf value for ``(atom, guard)`` pairs.

    Guards for a repeated atom are or-ed; false guards are dropped.
    """
    acc: dict = {}
    for a, g in cases:
        if g is FALSE:
            continue
        acc[a] = mk_or(acc[a], g) if a in acc else g
    if not acc:
        return FAIL
    if len(acc) == 1:
        return CLeaf(next(iter(acc)))
    return GLeaf(tuple(acc.items()))


def leaf_merge(pi: Formula, a: SymVal, b: SymVal) -> SymVal:
    if pi is TRUE or a is b:
        return a
    if pi is FALSE:
        return b
    if isinstance(a, CLeaf) and isinstance(b, CLeaf) and a.atom == b.atom:
        return a
    if isinstance(a, SLeaf) and isinstance(b, SLeaf) and a.const is b.const:
        return a
    s = current_session()
    npi = s.mk_not(pi)
    ca = dict(leaf_cases(a))
    cb = dict(leaf_cases(b))
    out = []
    for atom in list(ca) + [x for x in cb if x not in ca]:
        ga = ca.get(atom, FALSE)
        gb = cb.get(atom, FALSE)
        out.append((atom, s.mk_or(s.mk_and(pi, ga), s.mk_and(npi, gb))))
    return make_leaf(out)


def mk_node(left: SymVal, right: SymVal) -> SymVal:
    if left is FAIL or right is FAIL:
        return FAIL
    if _classic():
        from .classic import union_node

        return union_node(left, right)
    return Node(left, right)


def _classic() -> bool:
    return current_session().encoding == "classic"


def _split(v: SymVal) -> tuple[Formula, SymVal | None, Node | None]:
    if v.is_leaf:
        return TRUE, v, None
    if isinstance(v, Node):
        return FALSE, None, v
    if isinstance(v, Ite):
        return v.cond, v.leaf, v.node
    raise TypeError(f"cannot split {v!r}")


def merge(pi: Formula, a: SymVal, b: SymVal) -> SymVal:
    """Join ``a`` (taken when ``pi``) and ``b`` node-wise.

    ``fail`` on either side is dropped: the branch that produced it has
    already asserted its own infeasibility.
    """
    if pi is TRUE or a is b:
        return a
    if pi is FALSE:
        return b
    if a is FAIL:
        return b
    if b is FAIL:
        return a
    if not isinstance(a, SymVal) or not isinstance(b, SymVal) or _classic():
        from .classic import union_merge

        return union_merge(pi, a, b)
    phi, la, na = _split(a)
    psi, lb, nb = _split(b)
    s = current_session()
    cond = s.mk_and(s.mk_implies(pi, phi), s.mk_implies(s.mk_not(pi), psi))
    if la is None:
        leaf = lb
    elif lb is None:
        leaf = la
    else:
        leaf = leaf_merge(pi, la, lb)
    if cond is TRUE:
        return leaf
    if na is None:
        node = nb
    elif nb is None:
        node = na
    else:
        node = Node.joined(pi, na, nb)
    if cond is FALSE:
        return node
    return Ite(cond, leaf, node)


def node_count(v: SymVal) -> int:
    """Tree positions of a value (leaf or node), counting an Ite once."""
    if v is FAIL or v.is_leaf:
        return 1
    if isinstance(v, Ite):
        return node_count(v.node)
    return 1 + node_count(v.left) + node_count(v.right)


def check_shape(v: SymVal) -> None:
    """Raise AssertionError if ``v`` breaks the Ite shape invariant."""
    stack = [(v, False)]
    while stack:
        x, inside_node = stack.pop()
        if x is FAIL:
            assert not inside_node, "fail below an inner node"
        elif x.is_leaf:
            if isinstance(x, GLeaf):
                assert x.cases, "empty guarded leaf"
        elif isinstance(x, Node):
            stack.append((x.left, True))
            stack.append((x.right, True))
        elif isinstance(x, Ite):
            assert x.leaf.is_leaf, f"ite true branch must be a leaf: {x.leaf!r}"
            assert isinstance(x.node, Node), f"ite false branch must be a node: {x.node!r}"
            stack.append((x.node, inside_node))
        else:
            raise AssertionError(f"unknown value {x!r}")


# ---------------------------------------------------------------------------
# evaluation context


@dataclass
class EvalCtx:
    path: Formula = TRUE
    store: list[Formula] = field(default_factory=list)

    def assert_(self, claim: Formula) -> None:
        g = mk_implies(self.path, claim)
        if g is not TRUE:
            self.store.append(g)

    def holds(self) -> Formula:
        """Conjunction of everything asserted so far."""
        return mk_and(self.store)


def ctx_assert(ctx: EvalCtx, claim: Formula) -> None:
    ctx.assert_(claim)
