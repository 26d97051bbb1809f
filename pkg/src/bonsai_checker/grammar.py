"""BNF-style grammars in s-expression form, e.g.::

    ([exp zero (succ exp) (if exp exp exp) (zero? exp)])

Each clause names a nonterminal followed by its productions.  Atoms that
name a nonterminal are references to it; a Redex-style subscript
(``exp_1``) also refers to ``exp`` and must name a defined nonterminal.
Every other atom is a terminal.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

from . import sexpr as sx
from .bonsai import NIL, Const, Pair, Var, test
from .symcore import FALSE, EvalCtx, Formula, current_session

_SUBSCRIPT = re.compile(r"^(.+)_([0-9]+)$")


class GrammarError(ValueError):
    pass


@dataclass
class Grammar:
    nonterminals: list[str]
    productions: dict[str, list]
    start: str
    terminals: list[str] = field(default_factory=list)

    def ref(self, atom) -> str | None:
        """Nonterminal referenced by a template atom, if any."""
        if not isinstance(atom, str):
            return None
        if atom in self.productions:
            return atom
        m = _SUBSCRIPT.match(atom)
        if m and m.group(1) in self.productions:
            return m.group(1)
        return None


def parse_grammar(text: str) -> Grammar:
    try:
        top = sx.parse(text)
    except sx.SExprError as e:
        raise GrammarError(f"unparseable grammar: {e}") from e
    if not isinstance(top, tuple) or not top:
        raise GrammarError("grammar must be a non-empty list of clauses")
    productions: dict[str, list] = {}
    order = []
    for clause in top:
        if not isinstance(clause, tuple) or not clause or isinstance(clause[0], tuple):
            raise GrammarError(f"bad clause: {sx.render(clause)}")
        nt, *prods = clause
        if nt in productions:
            raise GrammarError(f"nonterminal {nt} defined twice")
        if not prods:
            raise GrammarError(f"nonterminal {nt} has no productions")
        productions[nt] = prods
        order.append(nt)
    g = Grammar(order, productions, order[0])
    terminals: dict[str, None] = {}

    def scan(t):
        if isinstance(t, tuple):
            for x in t:
                scan(x)
            return
        if g.ref(t) is not None:
            return
        m = _SUBSCRIPT.match(t)
        if m:
            # subscripted atoms always denote references
            raise GrammarError(f"reference to undefined nonterminal {m.group(1)!r}")
        terminals[t] = None

    for nt in order:
        for p in productions[nt]:
            scan(p)
    g.terminals = list(terminals)
    _check_productive(g)
    _check_unit_cycles(g)
    return g


def load_grammar(path) -> Grammar:
    return parse_grammar(Path(path).read_text(encoding="utf-8"))


def _check_productive(g: Grammar) -> None:
    productive: set[str] = set()

    def ok(t) -> bool:
        if isinstance(t, tuple):
            return all(ok(x) for x in t)
        r = g.ref(t)
        return r is None or r in productive

    changed = True
    while changed:
        changed = False
        for nt in g.nonterminals:
            if nt not in productive and any(ok(p) for p in g.productions[nt]):
                productive.add(nt)
                changed = True
    missing = [nt for nt in g.nonterminals if nt not in productive]
    if missing:
        raise GrammarError(f"nonterminals derive no finite tree: {missing}")


def _check_unit_cycles(g: Grammar) -> None:
    def visit(nt, stack):
        if nt in stack:
            raise GrammarError(f"cyclic unit productions through {nt}")
        for p in g.productions[nt]:
            r = g.ref(p) if not isinstance(p, tuple) else None
            if r is not None:
                visit(r, stack | {nt})

    for nt in g.nonterminals:
        visit(nt, frozenset())


def vocabulary(g: Grammar) -> tuple:
    """Terminals in order of first appearance, plus the list terminator."""
    vocab = list(g.terminals)
    if NIL not in vocab:
        vocab.append(NIL)
    return tuple(vocab)


# ---------------------------------------------------------------------------
# syntax checker


def _template_pattern(g: Grammar, template):
    """Pattern for a production plus the nonterminal of each variable."""
    nts: list[str] = []

    def build(t):
        if isinstance(t, tuple):
            out = Const(NIL)
            for item in reversed([build(x) for x in t]):
                out = Pair(item, out)
            return out
        r = g.ref(t)
        if r is not None:
            nts.append(r)
            return Var(f"_{len(nts) - 1}")
        return Const(t)

    return build(template), nts


def syntax_checker(g: Grammar) -> Callable:
    """``check(ctx, t, nt=None) -> Formula``: ``t`` derives from ``nt``.

    Each production is tested against the tree in one step; the results of
    the productions are or-ed, so overlapping productions do not shadow
    each other.  Templates deeper than the tree simply test false.
    """
    compiled = {
        nt: [_template_pattern(g, p) for p in g.productions[nt]] for nt in g.nonterminals
    }

    def check(ctx: EvalCtx | None, t, nt: str | None = None) -> Formula:
        s = current_session()
        memo: dict = {}

        def valid(v, nt) -> Formula:
            key = (id(v), nt)
            if key in memo:
                return memo[key][1]
            alts = []
            for pattern, sub in compiled[nt]:
                s.bump("pattern_tests")
                cond, binds = test(pattern, v)
                if cond is FALSE:
                    continue
                parts = [cond]
                for b, snt in zip(binds, sub):
                    f = valid(b, snt)
                    parts.append(f)
                    if f is FALSE:
                        break
                alts.append(s.mk_and(parts))
            out = s.mk_or(alts)
            memo[key] = (v, out)  # holding v keeps its id from being reused
            return out

        if not hasattr(t, "is_leaf"):
            from . import classic

            return classic.union_valid(compiled, t, nt or g.start)
        return valid(t, nt or g.start)

    return check


def is_valid(g: Grammar, tree, nt: str | None = None) -> bool:
    """Concrete syntax check, written directly over the template shapes."""

    def valid(x, nt) -> bool:
        return any(fits(p, x) for p in g.productions[nt])

    def fits(t, x) -> bool:
        if isinstance(t, tuple):
            for item in t:
                if not isinstance(x, tuple) or not fits(item, x[0]):
                    return False
                x = x[1]
            return x == NIL
        r = g.ref(t)
        if r is not None:
            return valid(x, r)
        return not isinstance(x, tuple) and x == t

    return valid(tree, nt or g.start)


# ---------------------------------------------------------------------------
# counting and enumeration


def count_trees(g: Grammar, depth: int, nt: str | None = None) -> int:
    """Number of distinct valid trees that fit in a tree of ``depth``.

    Exact for unambiguous grammars.
    """

    @functools.lru_cache(maxsize=None)
    def count(nt: str, d: int) -> int:
        return sum(ct(p, d) for p in g.productions[nt])

    def ct(t, d: int) -> int:
        if isinstance(t, tuple):
            if d < len(t):
                return 0
            out = 1
            for i, item in enumerate(t):
                out *= ct(item, d - 1 - i)
                if not out:
                    return 0
            return out
        r = g.ref(t)
        if r is not None:
            return count(r, d)
        return 1

    return count(nt or g.start, depth)


def enumerate_trees(
    g: Grammar, max_size: int, nt: str | None = None, max_depth: int | None = None
) -> Iterator:
    """Every valid tree with redex size <= ``max_size``, smallest first.

    ``max_depth`` additionally bounds the embedding depth.  Duplicates are
    suppressed even for ambiguous grammars.
    """
    dmax = max_depth if max_depth is not None else 2 * max_size + 2
    if max_depth is not None:
        # a tree of depth d has at most 2^(d+1) - 1 positions to count
        max_size = min(max_size, 2 ** (max_depth + 1) - 1)
    cache: dict = {}

    def of_nt(nt: str, n: int, d: int) -> list:
        key = (nt, n, d)
        if key not in cache:
            out: dict = {}
            for p in g.productions[nt]:
                for tree in of_template(p, n, d):
                    out[tree] = None
            cache[key] = list(out)
        return cache[key]

    def of_template(t, n: int, d: int) -> list:
        if isinstance(t, tuple):
            if d < len(t) or n < 1 + len(t):
                return []
            return [x for x in of_items(t, 0, n - 1, d - 1)]
        r = g.ref(t)
        if r is not None:
            return of_nt(r, n, d)
        return [t] if n == 1 else []

    def of_items(items: tuple, i: int, n: int, d: int) -> list:
        # trees for items[i:] laid out as a list spine, item i at depth d
        key = (id(items), i, n, d)
        if key in cache:
            return cache[key]
        if i == len(items):
            res = [NIL] if n == 0 else []
        else:
            res = []
            rest = len(items) - i - 1
            for k in range(1, n - rest + 1):
                heads = of_template(items[i], k, d)
                if not heads:
                    continue
                tails = of_items(items, i + 1, n - k, d - 1)
                for h in heads:
                    for tl in tails:
                        res.append((h, tl))
        cache[key] = res
        return res

    start = nt or g.start
    for n in range(1, max_size + 1):
        yield from of_nt(start, n, dmax)
