"""The classical symbolic syntax-tree encoding: unions over production choices.

A ``UnionVal`` lists ``(guard, payload)`` alternatives where a payload is a
``CLeaf`` or a ``UNode`` whose children are unions again.  Matching walks
every alternative, and merging concatenates alternative lists.  This is
the baseline that the Bonsai encoding is compared against; it answers the
same queries through the same entry points in ``bonsai``.
"""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

from .symcore import (
    FAIL,
    FALSE,
    TRUE,
    CLeaf,
    EvalCtx,
    Formula,
    GLeaf,
    IntExpr,
    Ite,
    Node,
    SLeaf,
    SymVal,
    current_session,
    eval_formula,
    int_const,
    int_sum,
    ite_int,
    leaf_cases,
)


class EmptyUnion(ValueError):
    pass


class UNode:
    __slots__ = ("left", "right")

    def __init__(self, left: "UnionVal", right: "UnionVal"):
        self.left = left
        self.right = right

    def __repr__(self) -> str:
        return f"[{self.left!r}, {self.right!r}]"


class UnionVal:
    __slots__ = ("branches",)

    def __init__(self, branches: tuple):
        self.branches = branches

    def __repr__(self) -> str:
        return "{" + " | ".join(f"{g!r}: {p!r}" for g, p in self.branches) + "}"

    def __len__(self) -> int:
        return len(self.branches)


def _single(payload) -> UnionVal:
    return UnionVal(((TRUE, payload),))


def lift(v) -> UnionVal:
    """Re-express a Bonsai value (or union) as a union."""
    if isinstance(v, UnionVal):
        return v
    if v is FAIL:
        return UnionVal(())
    if isinstance(v, (CLeaf, UNode)):
        return _single(v)
    if isinstance(v, (SLeaf, GLeaf)):
        return UnionVal(tuple((g, CLeaf(a)) for a, g in leaf_cases(v)))
    if isinstance(v, Node):
        return _single(UNode(lift(v.left), lift(v.right)))
    if isinstance(v, Ite):
        s = current_session()
        leaf = [(s.mk_and(v.cond, g), p) for g, p in lift(v.leaf).branches]
        return _union([*leaf, (s.mk_not(v.cond), UNode(lift(v.node.left), lift(v.node.right)))])
    raise TypeError(f"cannot lift {v!r}")


def _union(branches) -> UnionVal:
    # drop dead alternatives and join alternatives that share a payload
    acc: dict = {}
    payloads: dict = {}
    s = current_session()
    for g, p in branches:
        if g is FALSE:
            continue
        key = ("leaf", p.atom) if isinstance(p, CLeaf) else id(p)
        if key in acc:
            acc[key] = s.mk_or(acc[key], g)
        else:
            acc[key] = g
            payloads[key] = p
    return UnionVal(tuple((acc[k], payloads[k]) for k in acc))


def union_node(left, right) -> UnionVal:
    return _single(UNode(lift(left), lift(right)))


def union_merge(pi: Formula, a, b) -> UnionVal:
    s = current_session()
    npi = s.mk_not(pi)
    out = [(s.mk_and(pi, g), p) for g, p in lift(a).branches]
    out += [(s.mk_and(npi, g), p) for g, p in lift(b).branches]
    s.bump("union_merges")
    u = _union(out)
    if not u.branches:
        return FAIL
    return u


# ---------------------------------------------------------------------------
# construction


def fresh_union_tree(ctx: EvalCtx | None, g, depth: int, nt: str | None = None) -> UnionVal:
    """Union of every tree derivable from ``nt`` within ``depth``.

    One fresh constant per union chooses among the productions that fit.
    Sub-unions for the same nonterminal at the same tree position are
    shared between alternatives.
    """
    s = current_session()
    shared: dict = {}

    def of_nt(nt: str, path: str, d: int) -> UnionVal | None:
        key = (path, nt)
        if key in shared:
            return shared[key]
        alts = []  # one entry per production that fits, as a branch list
        for prod in g.productions[nt]:
            p = of_template(prod, path, d)
            if p is not None:
                alts.append(p.branches if isinstance(p, UnionVal) else ((TRUE, p),))
        if not alts:
            u = None
        elif len(alts) == 1:
            u = UnionVal(tuple(alts[0]))
        else:
            choice = s.fresh_const(range(len(alts)))
            u = UnionVal(
                tuple(
                    (s.mk_and(s.mk_eq(choice, i), gd), p)
                    for i, branches in enumerate(alts)
                    for gd, p in branches
                )
            )
        shared[key] = u
        return u

    def of_template(t, path: str, d: int):
        if isinstance(t, tuple):
            if d < len(t):
                return None
            return of_items(t, 0, path, d)
        r = g.ref(t)
        if r is not None:
            return of_nt(r, path, d)
        return CLeaf(t)

    def of_items(items: tuple, i: int, path: str, d: int):
        if i == len(items):
            return CLeaf("nil")
        head = of_template(items[i], path + "L", d - 1)
        if head is None:
            return None
        tail = of_items(items, i + 1, path + "R", d - 1)
        if tail is None:
            return None
        return UNode(lift(head), lift(tail))

    root = of_nt(nt or g.start, "", depth)
    if root is None:
        raise EmptyUnion(f"no production of {nt or g.start} fits depth {depth}")
    return root


# ---------------------------------------------------------------------------
# queries on unions


def union_leaf_eq(u, atom) -> Formula:
    s = current_session()
    return s.mk_or(
        [g for g, p in lift(u).branches if isinstance(p, CLeaf) and p.atom == atom]
    )


def union_tree_eq(a, b, _memo: dict | None = None) -> Formula:
    memo = {} if _memo is None else _memo
    a, b = lift(a), lift(b)
    if a is b:
        return TRUE
    key = (id(a), id(b))
    if key in memo:
        return memo[key][2]
    s = current_session()
    parts = []
    for ga, pa in a.branches:
        for gb, pb in b.branches:
            if isinstance(pa, CLeaf) and isinstance(pb, CLeaf):
                if pa.atom == pb.atom:
                    parts.append(s.mk_and(ga, gb))
            elif isinstance(pa, UNode) and isinstance(pb, UNode):
                parts.append(
                    s.mk_and(
                        ga,
                        gb,
                        union_tree_eq(pa.left, pb.left, memo),
                        union_tree_eq(pa.right, pb.right, memo),
                    )
                )
    out = s.mk_or(parts)
    memo[key] = (a, b, out)  # operands kept alive so their ids stay unique
    return out


def _test_payload(pattern, payload, binds: list) -> Formula:
    """Match one alternative; variables below bind whole child unions."""
    from .bonsai import Const, Pair, Var, pattern_vars

    s = current_session()
    if isinstance(pattern, Var):
        binds.append(_single(payload))
        return TRUE
    if isinstance(pattern, Const):
        return TRUE if isinstance(payload, CLeaf) and payload.atom == pattern.atom else FALSE
    assert isinstance(pattern, Pair)
    if not isinstance(payload, UNode):
        binds.extend(FAIL for _ in pattern_vars(pattern))
        return FALSE
    cl = _test_union(pattern.left, payload.left, binds)
    cr = _test_union(pattern.right, payload.right, binds)
    return s.mk_and(cl, cr)


def _test_union(pattern, u: UnionVal, binds: list) -> Formula:
    from .bonsai import Var, pattern_vars

    if isinstance(pattern, Var):
        binds.append(u)
        return TRUE
    s = current_session()
    s.bump("union_branch_tests", len(u.branches))
    nvars = len(pattern_vars(pattern))
    conds = []
    per_var: list[list] = [[] for _ in range(nvars)]
    for g, p in u.branches:
        sub: list = []
        c = _test_payload(pattern, p, sub)
        c = s.mk_and(g, c)
        conds.append(c)
        if c is FALSE:
            continue
        for k, b in enumerate(sub):
            if b is FAIL:
                continue
            # re-union the bindings, guarded by the alternative they came from
            per_var[k].extend((s.mk_and(c, bg), bp) for bg, bp in b.branches)
    for k in range(nvars):
        u_k = _union(per_var[k])
        binds.append(u_k if u_k.branches else FAIL)
    return s.mk_or(conds)


def union_match(ctx: EvalCtx, u, cases: Sequence):
    """Ordered match that visits every alternative of the union."""
    from .bonsai import merge_guarded

    s = current_session()
    u = lift(u)
    outer = ctx.path
    results = []
    for g, payload in u.branches:
        alt_path = s.mk_and(outer, g)
        if alt_path is FALSE:
            continue
        remaining = TRUE
        for pattern, handler in cases:
            s.bump("pattern_tests")
            binds: list = []
            cond = _test_payload(pattern, payload, binds)
            guard = s.mk_and(remaining, cond)
            remaining = s.mk_and(remaining, s.mk_not(cond))
            if guard is not FALSE:
                path = s.mk_and(alt_path, guard)
                if path is not FALSE:
                    ctx.path = path
                    try:
                        r = handler(*binds)
                    finally:
                        ctx.path = outer
                    results.append((s.mk_and(g, guard), r))
            if remaining is FALSE:
                break
        if remaining is not FALSE:
            ctx.path = alt_path
            ctx.assert_(s.mk_not(remaining))
            ctx.path = outer
    return merge_guarded(results)


def union_leaf_map(ctx: EvalCtx, u, fn: Callable):
    from .bonsai import merge_guarded

    s = current_session()
    u = lift(u)
    alts = [(g, p.atom) for g, p in u.branches if isinstance(p, CLeaf)]
    nodes = [g for g, p in u.branches if isinstance(p, UNode)]
    if nodes:
        alts.append((s.mk_or(nodes), None))
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


def union_concretize(u, model: Mapping, cache: dict):
    from .bonsai import concretize

    def go(u):
        for g, p in lift(u).branches:
            if eval_formula(g, model, cache):
                if isinstance(p, CLeaf):
                    return p.atom
                left, right = go(p.left), go(p.right)
                if left is FAIL or right is FAIL:
                    return FAIL
                return (left, right)
        return FAIL

    if isinstance(u, SymVal):
        return concretize(u, model, cache)
    return go(u)


def union_size(u) -> IntExpr:
    """Redex size of a union, as in ``bonsai.symbolic_size``."""

    def size(u: UnionVal, tail: bool) -> IntExpr:
        out = None
        for g, p in reversed(lift(u).branches):
            if isinstance(p, CLeaf):
                e = int_const(0 if (tail and p.atom == "nil") else 1)
            else:
                e = int_sum([int_const(0 if tail else 1), size(p.left, False), size(p.right, True)])
            out = e if out is None else ite_int(g, e, out)
        return out if out is not None else int_const(0)

    return size(u, False)


def union_valid(compiled: dict, t, nt: str) -> Formula:
    """Syntax validity of a union against the compiled grammar patterns."""
    s = current_session()
    memo: dict = {}

    def valid(u, nt) -> Formula:
        key = (id(u), nt)
        if key in memo:
            return memo[key][1]
        orig, u = u, lift(u)
        alts = []
        for g, payload in u.branches:
            for pattern, sub in compiled[nt]:
                s.bump("pattern_tests")
                binds: list = []
                cond = _test_payload(pattern, payload, binds)
                if cond is FALSE:
                    continue
                parts = [g, cond]
                parts.extend(valid(b, n) if b is not FAIL else FALSE for b, n in zip(binds, sub))
                alts.append(s.mk_and(parts))
        out = s.mk_or(alts)
        memo[key] = (orig, out)  # holding orig keeps its id from being reused
        return out

    return valid(t, nt)


def branch_count(u) -> int:
    """Total alternatives over all nested unions, counting shared ones once."""
    seen: dict = {}
    total = 0
    stack = [u]
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen[id(x)] = x
        x = lift(x)
        total += len(x.branches)
        for _, p in x.branches:
            if isinstance(p, UNode):
                stack.extend((p.left, p.right))
    return total
