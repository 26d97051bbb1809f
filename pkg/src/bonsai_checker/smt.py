"""SMT-LIB 2 emission, external solver runs, and size minimization.

Every finite-domain constant becomes an ``Int`` holding an index into its
domain.  Compound formulas are emitted once each as ``define-fun`` so that
shared sub-DAGs stay shared in the text.
"""

from __future__ import annotations

import logging
import os
import shutil
import subprocess
import time
from dataclasses import dataclass, field
from typing import Mapping

from . import sexpr as sx
from .symcore import (
    AND_K,
    EQ_K,
    FALSE_K,
    IMP_K,
    NOT_K,
    OR_K,
    TRUE_K,
    Formula,
    IntConst,
    IntExpr,
    IteInt,
    SymConst,
    eval_formula,
    eval_int,
    formula_constants,
    int_formulas,
    postorder,
)

log = logging.getLogger(__name__)

CONFIG = {"smt.solver": os.environ.get("BONSAI_SMT_SOLVER", "z3")}


class SolverError(RuntimeError):
    """The solver process could not be run or answered something unparseable."""


@dataclass
class Goal:
    constants: list[SymConst]
    hard: list[Formula] = field(default_factory=list)
    objective: IntExpr | None = None
    upper_bound: int | None = None  # emitted as objective <= bound

    @classmethod
    def of(cls, hard, objective: IntExpr | None = None, constants=None) -> "Goal":
        hard = list(hard)
        roots = hard + (int_formulas(objective) if objective is not None else [])
        found = {c.id: c for c in formula_constants(roots)}
        for c in constants or ():
            found[c.id] = c
        return cls([found[i] for i in sorted(found)], hard, objective)

    def bounded(self, k: int) -> "Goal":
        return Goal(self.constants, self.hard, self.objective, k)


@dataclass
class SolveResult:
    status: str  # "sat", "unsat" or "unknown"
    model: dict | None = None
    objective: int | None = None
    optimality: str | None = None  # "optimal" / "unknown-optimality" after minimize
    stats: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status == "sat"


# ---------------------------------------------------------------------------
# emission


def emit_smtlib(goal: Goal) -> str:
    lines = ["(set-logic QF_LIA)", "(set-option :produce-models true)"]
    for c in goal.constants:
        lines.append(f"(declare-fun {_cname(c)} () Int)")
        lines.append(f"(assert (and (<= 0 {_cname(c)}) (< {_cname(c)} {len(c.domain)})))")
    names: dict[int, str] = {}

    def ref(f: Formula) -> str:
        k = f.kind
        if k == TRUE_K:
            return "true"
        if k == FALSE_K:
            return "false"
        if k == EQ_K:
            c, i = f.args
            return f"(= {_cname(c)} {i})"
        return names[f.id]

    froots = list(goal.hard)
    if goal.objective is not None:
        froots += int_formulas(goal.objective)
    for f in postorder(froots):
        if f.kind <= EQ_K:
            continue
        args = " ".join(ref(a) for a in f.args)
        op = {NOT_K: "not", AND_K: "and", OR_K: "or", IMP_K: "=>"}[f.kind]
        name = f"f{len(names)}"
        lines.append(f"(define-fun {name} () Bool ({op} {args}))")
        names[f.id] = name
    for f in goal.hard:
        lines.append(f"(assert {ref(f)})")
    if goal.objective is not None and goal.upper_bound is not None:
        inames: dict[int, str] = {}

        def iref(e: IntExpr) -> str:
            if isinstance(e, IntConst):
                return str(e.value)
            return inames[id(e)]

        for e in postorder([goal.objective]):
            if isinstance(e, IntConst):
                continue
            name = f"n{len(inames)}"
            if isinstance(e, IteInt):
                body = f"(ite {ref(e.cond)} {iref(e.args[0])} {iref(e.args[1])})"
            else:
                body = "(+ " + " ".join(iref(a) for a in e.args) + ")"
            lines.append(f"(define-fun {name} () Int {body})")
            inames[id(e)] = name
        lines.append(f"(assert (<= {iref(goal.objective)} {goal.upper_bound}))")
    lines.append("(check-sat)")
    if goal.constants:
        lines.append("(get-value (" + " ".join(_cname(c) for c in goal.constants) + "))")
    return "\n".join(lines) + "\n"


def _cname(c: SymConst) -> str:
    return f"c{c.id}"


# ---------------------------------------------------------------------------
# solving


def _command(solver: str, timeout: float | None) -> list[str]:
    path = shutil.which(solver) or solver
    base = os.path.basename(path)
    if base.startswith("cvc5") or base.startswith("cvc4"):
        cmd = [path, "--lang=smt2", "--produce-models"]
        if timeout:
            cmd.append(f"--tlimit={int(timeout * 1000)}")
        return cmd
    cmd = [path, "-smt2", "-in"]
    if timeout:
        cmd.append(f"-T:{max(1, int(timeout + 0.999))}")
    return cmd


def solve(goal: Goal, timeout: float | None = None, solver: str | None = None, emit_to=None) -> SolveResult:
    """Run one solver process on ``goal``; a timeout is reported as unknown."""
    text = emit_smtlib(goal)
    if emit_to is not None:
        with open(emit_to, "w", encoding="utf-8") as fh:
            fh.write(text)
    solver = solver or CONFIG["smt.solver"]
    cmd = _command(solver, timeout)
    start = time.perf_counter()
    try:
        proc = subprocess.run(
            cmd,
            input=text,
            capture_output=True,
            text=True,
            timeout=None if timeout is None else timeout + 5,
        )
    except FileNotFoundError as e:
        raise SolverError(f"solver not found: {solver}") from e
    except subprocess.TimeoutExpired:
        return SolveResult("unknown", stats=_stats(start, text, "timeout"))
    stats = _stats(start, text)
    out = proc.stdout.strip()
    first, _, rest = out.partition("\n")
    first = first.strip()
    if first == "unsat":
        return SolveResult("unsat", stats=stats)
    if first in ("unknown", "timeout") or (not out and "timeout" in proc.stderr):
        stats["reason"] = "timeout"
        return SolveResult("unknown", stats=stats)
    if first != "sat":
        raise SolverError(f"unexpected solver output (exit {proc.returncode}): {out[:200]!r} {proc.stderr[:200]!r}")
    model = parse_model(rest, goal.constants)
    return SolveResult("sat", model=model, stats=stats)


def _stats(start: float, text: str, reason: str | None = None) -> dict:
    out = {"solve_ms": (time.perf_counter() - start) * 1000.0, "smt_bytes": len(text)}
    if reason:
        out["reason"] = reason
    return out


def parse_model(text: str, constants: list[SymConst]) -> dict:
    if not constants:
        return {}
    try:
        pairs = sx.parse(text)
    except sx.SExprError as e:
        raise SolverError(f"cannot parse model: {text[:200]!r}") from e
    by_name = {_cname(c): c for c in constants}
    model = {}
    for pair in pairs:
        if not (isinstance(pair, tuple) and len(pair) == 2):
            raise SolverError(f"bad model entry {pair!r}")
        name, value = pair
        c = by_name[name]
        idx = int(value)
        if not 0 <= idx < len(c.domain):
            raise SolverError(f"{name} = {idx} outside its domain")
        model[c] = c.domain[idx]
    missing = [c for c in constants if c not in model]
    if missing:
        raise SolverError(f"model is missing {len(missing)} constants")
    return model


def minimize(goal: Goal, timeout: float | None = None, solver: str | None = None) -> SolveResult:
    """Linear descent on the objective: tighten ``<= k-1`` until unsat."""
    if goal.objective is None:
        raise ValueError("minimize needs an objective")
    deadline = None if timeout is None else time.perf_counter() + timeout
    start = time.perf_counter()
    steps = 0

    def remaining():
        if deadline is None:
            return None
        return max(0.5, deadline - time.perf_counter())

    res = solve(goal, remaining(), solver)
    steps += 1
    if not res.sat:
        res.stats["steps"] = steps
        return res
    best = res
    best.objective = eval_int(goal.objective, best.model)
    optimality = "optimal"
    while best.objective > 0:
        if deadline is not None and time.perf_counter() >= deadline:
            optimality = "unknown-optimality"
            break
        nxt = solve(goal.bounded(best.objective - 1), remaining(), solver)
        steps += 1
        if nxt.status == "unsat":
            break
        if nxt.status == "unknown":
            optimality = "unknown-optimality"
            break
        value = eval_int(goal.objective, nxt.model)
        log.debug("minimize: %d -> %d", best.objective, value)
        nxt.objective = value
        best = nxt
    best.optimality = optimality
    best.stats = {"solve_ms": (time.perf_counter() - start) * 1000.0, "steps": steps}
    return best


def check_model(goal: Goal, model: Mapping) -> bool:
    """Every hard formula evaluates to true under ``model``."""
    cache: dict = {}
    return all(eval_formula(f, model, cache) for f in goal.hard)
