"""Benchmark harness: encoding scaling and the bug suite.

Each trial runs in its own process so that a wall-clock budget also covers
symbolic evaluation, which the solver timeout alone cannot bound.
"""

from __future__ import annotations

import csv
import io
import multiprocessing as mp
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

from .grammar import count_trees
from .langs import get_model
from .langs.arith import BUG as ARITH_BUG
from .langs.stlc import BUGS as STLC_BUGS, PUBLISHED_SIZES
from .queries import QueryConfig, run_query

CSV_COLUMNS = ("encoding", "lang", "bug", "depth", "fuel", "eval_ms", "solve_ms", "status", "size", "count_trees")

# Published sizes (first witness, minimized) of the arithmetic example.
ARITH_PUBLISHED = (13, 13)


@dataclass
class Trial:
    encoding: str
    lang: str
    bug: str | None
    depth: int
    fuel: int
    eval_ms: float | None = None
    solve_ms: float | None = None
    status: str = "not-run"  # sat / unsat / unknown / timeout / error
    size: int | None = None
    count_trees: int | None = None
    minimize: bool = False
    program: str | None = None
    replay: dict | None = None
    published_size: int | None = None
    error: str | None = None

    def csv_row(self) -> dict:
        return {k: ("" if getattr(self, k) is None else getattr(self, k)) for k in CSV_COLUMNS}


def to_csv(trials: list[Trial]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for t in trials:
        w.writerow(t.csv_row())
    return buf.getvalue()


def run_trial(cfg: QueryConfig, kind: str = "soundness") -> Trial:
    trial = Trial(cfg.encoding, cfg.lang, cfg.bug, cfg.depth, cfg.fuel, minimize=cfg.minimize)
    trial.count_trees = count_trees(get_model(cfg.lang).grammar, cfg.depth)
    try:
        r = run_query(cfg, kind)
    except Exception as e:  # recorded per trial; the harness keeps going
        trial.status = "error"
        trial.error = f"{type(e).__name__}: {e}"
        return trial
    trial.eval_ms = round(r.eval_ms, 3)
    trial.solve_ms = round(r.solve_ms, 3)
    trial.status = r.status
    if r.counterexample is not None:
        trial.size = r.counterexample.size
        trial.program = r.counterexample.program
        trial.replay = r.counterexample.replay
    return trial


def _child(cfg_dict, kind, conn):
    conn.send(asdict(run_trial(QueryConfig(**cfg_dict), kind)))
    conn.close()


def run_isolated(cfg: QueryConfig, budget: float | None, kind: str = "soundness") -> Trial:
    """``run_trial`` in a child process, killed after ``budget`` seconds."""
    if budget is None:
        return run_trial(cfg, kind)
    ctx = mp.get_context("fork")
    recv, send = ctx.Pipe(duplex=False)
    proc = ctx.Process(target=_child, args=(asdict(cfg), kind, send), daemon=True)
    start = time.perf_counter()
    proc.start()
    send.close()
    done = recv.poll(budget)
    if done:
        try:
            data = recv.recv()
        except EOFError:
            done = False
    proc.join(0.1 if done else 0)
    if proc.is_alive():
        proc.kill()
        proc.join()
    if done:
        return Trial(**data)
    trial = Trial(cfg.encoding, cfg.lang, cfg.bug, cfg.depth, cfg.fuel, minimize=cfg.minimize)
    trial.count_trees = count_trees(get_model(cfg.lang).grammar, cfg.depth)
    trial.status = "timeout" if proc.exitcode in (None, -9) else "error"
    trial.eval_ms = round((time.perf_counter() - start) * 1000.0, 3)
    return trial


def bench_scaling(
    lang: str = "lam",
    depths=range(1, 40),
    encodings=("bonsai", "classic"),
    budget: float = 60.0,
    fuel: int | None = None,
) -> list[Trial]:
    """Deepen each encoding until its cumulative wall time exceeds ``budget``.

    The last trial of an encoding is the one that ran out of budget (status
    ``timeout``), unless every depth finished.
    """
    out = []
    for enc in encodings:
        spent = 0.0
        for d in depths:
            left = budget - spent
            if left <= 0:
                break
            cfg = QueryConfig(lang=lang, depth=d, fuel=fuel, encoding=enc, timeout=left)
            start = time.perf_counter()
            trial = run_isolated(cfg, left)
            spent += time.perf_counter() - start
            out.append(trial)
            if trial.status not in ("sat", "unsat"):
                break
    return out


def reached_depth(trials: list[Trial], encoding: str) -> int:
    """Deepest depth the encoding answered within its budget (0 if none)."""
    done = [t.depth for t in trials if t.encoding == encoding and t.status in ("sat", "unsat")]
    return max(done, default=0)


def bugsuite_configs(minimize_modes=(False, True), timeout: float = 300.0) -> list[QueryConfig]:
    bugs = [("arith", ARITH_BUG)] + [("stlc", b) for b in STLC_BUGS]
    return [
        QueryConfig(lang=lang, bug=bug, minimize=mz, timeout=timeout)
        for mz in minimize_modes
        for lang, bug in bugs
    ]


def published_size(bug: str, minimized: bool) -> int:
    first, best = ARITH_PUBLISHED if bug == ARITH_BUG else PUBLISHED_SIZES[bug]
    return best if minimized else first


def bench_bugsuite(timeout: float = 300.0, jobs: int = 1, minimize_modes=(False, True)) -> tuple[list[Trial], bool]:
    """Every bug, plain and minimized; the bool is false if any bug was missed."""
    cfgs = bugsuite_configs(minimize_modes, timeout)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs, mp_context=mp.get_context("fork")) as pool:
            trials = list(pool.map(_isolated_with_slack, cfgs))
    else:
        trials = [_isolated_with_slack(c) for c in cfgs]
    for t in trials:
        t.published_size = published_size(t.bug, t.minimize)
    return trials, all(t.status == "sat" for t in trials)


def _isolated_with_slack(cfg: QueryConfig) -> Trial:
    return run_isolated(cfg, None if cfg.timeout is None else cfg.timeout * 1.5 + 10)


def suite_table(trials: list[Trial]) -> str:
    head = f"{'bug':<10} {'min':<4} {'depth':>5} {'status':<8} {'size':>5} {'published':>9} {'time_s':>8}  program"
    lines = [head]
    for t in trials:
        secs = ((t.eval_ms or 0) + (t.solve_ms or 0)) / 1000.0
        lines.append(
            f"{t.bug:<10} {'yes' if t.minimize else 'no':<4} {t.depth:>5} {t.status:<8} "
            f"{'' if t.size is None else t.size:>5} {t.published_size or '':>9} {secs:>8.2f}  {t.program or ''}"
        )
    return "\n".join(lines)

