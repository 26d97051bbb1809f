"""Executable language models and their registry."""

from __future__ import annotations

import functools

from . import arith, lam, mini, stlc
from .base import LangModel, concrete_run

LANGS = {"arith": arith.model, "stlc": stlc.model, "mini": mini.model, "lam": lam.model}


@functools.lru_cache(maxsize=None)
def get_model(name: str) -> LangModel:
    try:
        return LANGS[name]()
    except KeyError:
        raise ValueError(f"unknown language {name!r}; expected one of {sorted(LANGS)}") from None


__all__ = ["LANGS", "LangModel", "concrete_run", "get_model"]
