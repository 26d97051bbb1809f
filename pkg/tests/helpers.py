"""Test oracles shared by several test modules."""

from __future__ import annotations

import functools

from hypothesis import strategies as st

from bonsai_checker.symcore import FALSE, TRUE


@functools.lru_cache(maxsize=None)
def concrete_trees(depth: int, vocab: tuple) -> tuple:
    """Every concrete tree of depth <= ``depth`` over ``vocab`` (brute force)."""
    if depth == 0:
        return tuple(vocab)
    smaller = concrete_trees(depth - 1, vocab)
    return tuple(vocab) + tuple((l, r) for l in smaller for r in smaller)


def naive_size(e) -> int:
    """Redex size of an s-expression in tuple form: atoms and lists count once."""
    if isinstance(e, tuple):
        return 1 + sum(naive_size(x) for x in e)
    return 1


@functools.lru_cache(maxsize=None)
def sexprs_of_size(size: int, atoms: tuple) -> tuple:
    """Every s-expression (atoms and non-empty tuples) with redex size exactly ``size``."""
    if size <= 0:
        return ()
    out = list(atoms) if size == 1 else []
    # a list costs one plus the sizes of its items
    out.extend(_item_lists(size - 1, atoms))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def _item_lists(budget: int, atoms: tuple) -> tuple:
    """Non-empty item tuples whose sizes sum to ``budget``."""
    out = []
    for first in range(1, budget + 1):
        for head in sexprs_of_size(first, atoms):
            if first == budget:
                out.append((head,))
            else:
                out.extend((head,) + rest for rest in _item_lists(budget - first, atoms))
    return tuple(out)


def union_force(u, tree, model=None):
    """A model of the choice constants under which union ``u`` denotes ``tree``.

    Returns None when the tree is not in the union.  Branch guards are
    conjunctions of choice equalities, so the model is read off them.
    """
    from bonsai_checker.classic import UNode, lift
    from bonsai_checker.symcore import AND_K, EQ_K, TRUE_K, CLeaf

    model = {} if model is None else model

    def literals(g):
        if g.kind == TRUE_K:
            return []
        if g.kind == EQ_K:
            return [g.args]
        if g.kind == AND_K:
            return [lit for a in g.args for lit in literals(a)]
        raise ValueError(f"unexpected guard {g!r}")

    def go(u, t, model):
        for g, p in lift(u).branches:
            lits = literals(g)
            if any(c in model and model[c] != c.domain[i] for c, i in lits):
                continue
            if isinstance(p, CLeaf):
                if isinstance(t, tuple) or p.atom != t:
                    continue
                trial = dict(model)
                trial.update({c: c.domain[i] for c, i in lits})
                return trial
            if not isinstance(t, tuple):
                continue
            trial = dict(model)
            trial.update({c: c.domain[i] for c, i in lits})
            trial = go(p.left, t[0], trial)
            if trial is None:
                continue
            trial = go(p.right, t[1], trial)
            if trial is not None:
                return trial
        return None

    found = go(u, tree, model)
    if found is None:
        return None
    return found


def random_program(g, rng, budget=12, nt=None):
    """A random s-expression derived from ``g``; None if the budget ran out."""

    def gen(t, budget):
        if budget[0] <= 0:
            raise _Exhausted
        budget[0] -= 1
        if isinstance(t, tuple):
            return tuple(gen(x, budget) for x in t)
        r = g.ref(t)
        if r is None:
            return t
        return gen(rng.choice(g.productions[r]), budget)

    try:
        return gen(nt or g.start, [budget])
    except _Exhausted:
        return None


class _Exhausted(Exception):
    pass


# -- random formulas over a mirror syntax tree, with a naive evaluator -----

DOMAIN = ("p", "q", "r")


def formula_trees(n_consts):
    leaf = st.tuples(st.just("eq"), st.integers(0, n_consts - 1), st.sampled_from(DOMAIN))
    consts = st.sampled_from([("true",), ("false",)])

    def extend(inner):
        return st.one_of(
            st.tuples(st.just("not"), inner),
            st.tuples(st.sampled_from(["and", "or"]), st.lists(inner, max_size=4).map(tuple)),
            st.tuples(st.just("=>"), inner, inner),
            st.tuples(st.just("ite"), inner, inner, inner),
        )

    return st.recursive(st.one_of(leaf, consts), extend, max_leaves=20)


def build(s, consts, tree):
    op = tree[0]
    if op == "true":
        return TRUE
    if op == "false":
        return FALSE
    if op == "eq":
        return s.mk_eq(consts[tree[1]], tree[2])
    if op == "not":
        return s.mk_not(build(s, consts, tree[1]))
    if op == "and":
        return s.mk_and(*[build(s, consts, t) for t in tree[1]])
    if op == "or":
        return s.mk_or(*[build(s, consts, t) for t in tree[1]])
    if op == "=>":
        return s.mk_implies(build(s, consts, tree[1]), build(s, consts, tree[2]))
    return s.mk_ite(*(build(s, consts, t) for t in tree[1:]))


def naive(tree, values):
    op = tree[0]
    if op == "true":
        return True
    if op == "false":
        return False
    if op == "eq":
        return values[tree[1]] == tree[2]
    if op == "not":
        return not naive(tree[1], values)
    if op == "and":
        return all(naive(t, values) for t in tree[1])
    if op == "or":
        return any(naive(t, values) for t in tree[1])
    if op == "=>":
        return (not naive(tree[1], values)) or naive(tree[2], values)
    c, a, b = (naive(t, values) for t in tree[1:])
    return a if c else b
