"""Minimal s-expression reader and printer.

Atoms are kept as strings; lists become tuples.  ``;`` starts a comment
that runs to the end of the line.  Both ``(...)`` and ``[...]`` delimit
lists, as in Racket.
"""

from __future__ import annotations

import re
from typing import Union

SExpr = Union[str, tuple]

_TOKEN = re.compile(r"""\s*(?:(;[^\n]*)|([()\[\]])|('+)|([^\s()\[\];']+))""")


class SExprError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise SExprError(f"unexpected character at offset {pos}: {text[pos]!r}")
        pos = m.end()
        comment, paren, quote, atom = m.groups()
        if comment:
            continue
        tokens.append(paren or quote or atom)
    return tokens


def parse_many(text: str) -> list[SExpr]:
    tokens = tokenize(text)
    out = []
    i = 0
    while i < len(tokens):
        expr, i = _parse(tokens, i)
        out.append(expr)
    return out


def parse(text: str) -> SExpr:
    """Parse exactly one s-expression.  A leading quote is ignored."""
    exprs = parse_many(text)
    if len(exprs) != 1:
        raise SExprError(f"expected one s-expression, found {len(exprs)}")
    return exprs[0]


def _parse(tokens: list[str], i: int) -> tuple[SExpr, int]:
    if i >= len(tokens):
        raise SExprError("unexpected end of input")
    tok = tokens[i]
    if tok.startswith("'"):
        return _parse(tokens, i + 1)
    if tok in "([":
        close = ")" if tok == "(" else "]"
        items = []
        i += 1
        while True:
            if i >= len(tokens):
                raise SExprError("unbalanced parenthesis")
            if tokens[i] in ")]":
                if tokens[i] != close:
                    raise SExprError("mismatched bracket")
                return tuple(items), i + 1
            item, i = _parse(tokens, i)
            items.append(item)
    if tok in ")]":
        raise SExprError("unexpected closing bracket")
    return tok, i + 1


def render(expr: SExpr) -> str:
    if isinstance(expr, tuple):
        return "(" + " ".join(render(e) for e in expr) + ")"
    return str(expr)
