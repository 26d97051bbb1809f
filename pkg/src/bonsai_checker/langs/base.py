"""Shared plumbing for executable language models."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Hashable

from ..bonsai import NoMatch, ConcreteTree
from ..grammar import Grammar, is_valid, load_grammar
from ..symcore import FAIL, FALSE, EvalCtx, Formula, SymVal, current_session

GRAMMAR_DIR = Path(__file__).parent / "grammars"


def grammar_file(name: str) -> Grammar:
    return load_grammar(GRAMMAR_DIR / f"{name}.bnf.sexp")


class Crash(Exception):
    """A concrete run got stuck."""


class OutOfFuel(Exception):
    pass


class RuntimeErrorValue(Exception):
    """A benign runtime error, such as the head of an empty list."""


class IllTyped(Exception):
    """A concrete typecheck rejected the program."""


@dataclass
class ExecOutcome:
    value: SymVal
    ok: Formula
    out_of_fuel: Formula
    errored: Formula = FALSE  # halted on a benign runtime error

    def failure(self) -> Formula:
        s = current_session()
        return s.mk_and(s.mk_not(self.ok), s.mk_not(self.out_of_fuel), s.mk_not(self.errored))


@dataclass
class RunResult:
    typechecks: bool
    outcome: str  # "ok", "fail", "out_of_fuel" or "not-run"
    value: Hashable = None
    type: Hashable = None


class Machine:
    """Symbolic execution state: assertion context plus fuel bookkeeping.

    A crash asserts false on the current path and stops it by returning
    ``FAIL``.  Running out of fuel and benign runtime errors also stop the
    path; they are recorded only for paths on which nothing has failed
    yet, so the outcomes stay disjoint even though merged values on a
    stopped path are meaningless afterwards.
    """

    def __init__(self, ctx: EvalCtx | None = None):
        self.ctx = ctx if ctx is not None else EvalCtx()
        self.fuel_hits: list[Formula] = []
        self.error_hits: list[Formula] = []

    def crash(self):
        self.ctx.assert_(FALSE)
        return FAIL

    def _halt(self, into: list):
        s = current_session()
        into.append(s.mk_and(self.ctx.path, self.ctx.holds()))
        return FAIL

    def out_of_fuel(self):
        return self._halt(self.fuel_hits)

    def error(self):
        return self._halt(self.error_hits)

    def outcome(self, value) -> ExecOutcome:
        s = current_session()
        return ExecOutcome(value, self.ctx.holds(), s.mk_or(self.fuel_hits), s.mk_or(self.error_hits))


@dataclass
class LangModel:
    name: str
    grammar: Grammar
    check: Callable  # (ctx, t, bug) -> SymVal
    execute: Callable  # (ctx, t, fuel, bug) -> ExecOutcome
    concrete_check: Callable  # (tree, bug) -> type, raises IllTyped
    concrete_execute: Callable  # (tree, fuel, bug) -> value, raises Crash/OutOfFuel
    bugs: tuple = ()
    default_depth: int = 5
    default_fuel: int = 4
    bug_depths: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def validate_bug(self, bug: str | None) -> str | None:
        if bug in (None, "none", ""):
            return None
        if bug not in self.bugs:
            raise ValueError(f"unknown bug {bug!r} for {self.name}; expected one of {self.bugs}")
        return bug

    def depth_for(self, bug: str | None) -> int:
        return self.bug_depths.get(bug, self.default_depth)


def concrete_run(model: LangModel, program: ConcreteTree, fuel: int | None = None, bug: str | None = None) -> RunResult:
    """Plain recursive replay of a concrete program (check, then execute)."""
    bug = model.validate_bug(bug)
    fuel = model.default_fuel if fuel is None else fuel
    if not is_valid(model.grammar, program):
        return RunResult(False, "not-run")
    try:
        ty = model.concrete_check(program, bug)
    except (IllTyped, NoMatch, RecursionError):
        return RunResult(False, "not-run")
    try:
        value = model.concrete_execute(program, fuel, bug)
    except OutOfFuel:
        return RunResult(True, "out_of_fuel", type=ty)
    except (Crash, NoMatch):
        return RunResult(True, "fail", type=ty)
    except RuntimeErrorValue:
        return RunResult(True, "ok", "error", ty)
    return RunResult(True, "ok", value, ty)


def run_outcome(model: LangModel, program: ConcreteTree, fuel: int, bug: str | None) -> str:
    """Outcome of execution alone, whether or not the program typechecks."""
    try:
        model.concrete_execute(program, fuel, bug)
    except OutOfFuel:
        return "out_of_fuel"
    except (Crash, NoMatch):
        return "fail"
    except RuntimeErrorValue:
        return "ok"
    return "ok"


def accepts(model: LangModel, program: ConcreteTree, bug: str | None) -> bool:
    """Concrete syntax-and-type acceptance."""
    if not is_valid(model.grammar, program):
        return False
    try:
        model.concrete_check(program, bug)
    except (IllTyped, NoMatch):
        return False
    return True
