"""Solver-aided checking of executable type-system models."""

from .symcore import Session, EvalCtx, merge, check_shape
from .bonsai import fresh_tree, tree_match, pat, concretize, embed_sexpr, render_sexpr

__all__ = [
    "Session",
    "EvalCtx",
    "merge",
    "check_shape",
    "fresh_tree",
    "tree_match",
    "pat",
    "concretize",
    "embed_sexpr",
    "render_sexpr",
]
