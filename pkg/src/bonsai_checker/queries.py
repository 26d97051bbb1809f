"""Soundness, diff and minimized queries over one shared symbolic program.

The syntax, typing and execution formulas are produced by independent
evaluations over the same symbolic tree and only then conjoined into a
solver goal.  Every witness the solver returns is replayed on the concrete
twins before it is reported.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

from . import classic, smt
from .bonsai import concretize, fresh_tree, parse_program, redex_size, render_sexpr, symbolic_size
from .grammar import syntax_checker, vocabulary
from .langs import LANGS, get_model
from .langs.base import LangModel, accepts, concrete_run
from .symcore import EvalCtx, Session, mk_not


class InternalSoundnessError(RuntimeError):
    """A solver witness did not replay: the symbolic engine disagrees with the concrete twins."""


@dataclass
class QueryConfig:
    lang: str = "arith"
    depth: int | None = None
    fuel: int | None = None
    bug: str | None = None
    check_a: str | None = None
    check_b: str | None = None
    minimize: bool = False
    timeout: float | None = None
    encoding: str = "bonsai"
    emit_smt: str | None = None
    solver: str | None = None

    def __post_init__(self):
        if self.lang not in LANGS:
            raise ValueError(f"unknown language {self.lang!r}")
        if self.encoding not in ("bonsai", "classic"):
            raise ValueError(f"unknown encoding {self.encoding!r}")
        m = get_model(self.lang)
        self.bug = m.validate_bug(self.bug)
        self.check_a = m.validate_bug(self.check_a)
        self.check_b = m.validate_bug(self.check_b)
        if self.depth is None:
            self.depth = m.depth_for(self.bug or self.check_a or self.check_b)
        if self.fuel is None:
            self.fuel = m.default_fuel
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.fuel < 1:
            raise ValueError("fuel must be >= 1")


@dataclass
class Counterexample:
    query: str
    program: str
    size: int
    replay: dict
    solver_status: str
    time_ms: float
    stats: dict = field(default_factory=dict)
    tree: object = None

    def report(self) -> dict:
        return {
            "query": self.query,
            "program": self.program,
            "size": self.size,
            "time_ms": round(self.time_ms, 3),
            "solver_status": self.solver_status,
            "replay": self.replay,
        }


@dataclass
class QueryResult:
    query: str
    status: str  # sat / unsat / unknown
    counterexample: Counterexample | None
    eval_ms: float
    solve_ms: float
    stats: dict = field(default_factory=dict)

    def report(self) -> dict:
        if self.counterexample is not None:
            out = self.counterexample.report()
        else:
            out = {
                "query": self.query,
                "program": None,
                "size": None,
                "time_ms": round(self.eval_ms + self.solve_ms, 3),
                "solver_status": self.status,
                "replay": None,
            }
        out["eval_ms"] = round(self.eval_ms, 3)
        out["solve_ms"] = round(self.solve_ms, 3)
        return out

    def to_json(self) -> str:
        return json.dumps(self.report(), sort_keys=True)


class QueryTimeout(RuntimeError):
    pass


# ---------------------------------------------------------------------------


def _symbolic_program(cfg: QueryConfig, m: LangModel):
    if cfg.encoding == "classic":
        t = classic.fresh_union_tree(None, m.grammar, cfg.depth)
        return t, classic.union_size(t)
    t = fresh_tree(None, cfg.depth, vocabulary(m.grammar))
    return t, symbolic_size(t)


def _evaluate(cfg: QueryConfig, kind: str):
    """Build the goal for ``kind``; returns (tree, goal)."""
    m = get_model(cfg.lang)
    t, size = _symbolic_program(cfg, m)
    syntax = syntax_checker(m.grammar)(None, t)
    if kind == "soundness":
        tc = EvalCtx()
        m.check(tc, t, cfg.bug)
        xc = EvalCtx()
        out = m.execute(xc, t, cfg.fuel, cfg.bug)
        hard = [syntax, tc.holds(), out.failure()]
    else:
        ac, bc = EvalCtx(), EvalCtx()
        m.check(ac, t, cfg.check_a)
        m.check(bc, t, cfg.check_b)
        hard = [syntax, ac.holds(), mk_not(bc.holds())]
    return m, t, hard, size


def _run(cfg: QueryConfig, kind: str) -> QueryResult:
    start = time.perf_counter()
    with Session(encoding=cfg.encoding) as s:
        m, t, hard, size = _evaluate(cfg, kind)
        goal = smt.Goal.of(hard, size if cfg.minimize else None, s.constants)
        eval_ms = (time.perf_counter() - start) * 1000.0
        stats = {"formulas": s.formula_count, "constants": len(s.constants), **s.counters}
        if cfg.emit_smt:
            with open(cfg.emit_smt, "w", encoding="utf-8") as fh:
                fh.write(smt.emit_smtlib(goal))
        t1 = time.perf_counter()
        if cfg.minimize:
            res = smt.minimize(goal, cfg.timeout, cfg.solver)
        else:
            res = smt.solve(goal, cfg.timeout, cfg.solver)
        solve_ms = (time.perf_counter() - t1) * 1000.0
        stats.update(res.stats)
        if not res.sat:
            return QueryResult(kind, res.status, None, eval_ms, solve_ms, stats)
        if not smt.check_model(goal, res.model):
            raise InternalSoundnessError("solver model does not satisfy the emitted goal")
        tree = concretize(t, res.model)
        program = render_sexpr(tree)
        ce = Counterexample(
            query=kind,
            program=program,
            size=redex_size(tree),
            replay={},
            solver_status="sat" if not cfg.minimize else f"sat/{res.optimality}",
            time_ms=eval_ms + solve_ms,
            stats=stats,
            tree=tree,
        )
        verdict = verify_counterexample(ce, cfg)
        ce.replay = verdict
        if not verdict["confirmed"]:
            raise InternalSoundnessError(f"witness {program} failed replay: {verdict}")
        if cfg.minimize and res.objective is not None and res.objective != ce.size:
            raise InternalSoundnessError(f"objective {res.objective} != replayed size {ce.size}")
        return QueryResult(kind, "sat", ce, eval_ms, solve_ms, stats)


def soundness_query(cfg: QueryConfig) -> Counterexample | None:
    return _unwrap(_run(cfg, "soundness"))


def diff_query(cfg: QueryConfig, check_a: str | None = None, check_b: str | None = None) -> Counterexample | None:
    if check_a is not None or check_b is not None:
        cfg = QueryConfig(**{**asdict(cfg), "check_a": check_a, "check_b": check_b})
    return _unwrap(_run(cfg, "diff"))


def minimize_query(cfg: QueryConfig, kind: str = "soundness") -> Counterexample | None:
    cfg = QueryConfig(**{**asdict(cfg), "minimize": True})
    return _unwrap(_run(cfg, kind))


def run_query(cfg: QueryConfig, kind: str = "soundness") -> QueryResult:
    return _run(cfg, kind)


def _unwrap(r: QueryResult) -> Counterexample | None:
    if r.status == "unknown":
        raise QueryTimeout(f"{r.query} query timed out")
    return r.counterexample


def verify_counterexample(ce: Counterexample, cfg: QueryConfig) -> dict:
    """Re-parse the rendered program and check the query's predicate concretely."""
    m = get_model(cfg.lang)
    try:
        tree = parse_program(ce.program, vocabulary(m.grammar))
    except ValueError as e:
        return {"confirmed": False, "reason": f"unparseable: {e}"}
    if ce.query == "soundness":
        r = concrete_run(m, tree, cfg.fuel, cfg.bug)
        ok = r.typechecks and r.outcome == "fail"
        return {"confirmed": ok, "typechecks": r.typechecks, "outcome": r.outcome}
    a = accepts(m, tree, cfg.check_a)
    b = accepts(m, tree, cfg.check_b)
    return {"confirmed": a and not b, "accepted_by_a": a, "accepted_by_b": b}
