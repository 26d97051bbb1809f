"""Command-line driver: ``check``, ``diff`` and ``bench``.

Exit codes: 0 the query was answered, 1 a witness was found under
``--expect-none``, 2 solver/transport or internal error, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .bench import bench_bugsuite, bench_scaling, reached_depth, suite_table, to_csv
from .langs import LANGS
from .queries import InternalSoundnessError, QueryConfig, run_query
from .smt import SolverError

EX_OK, EX_FOUND, EX_ERROR, EX_USAGE = 0, 1, 2, 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EX_USAGE)


def _query_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lang", choices=sorted(LANGS), default="arith")
    p.add_argument("--depth", type=int)
    p.add_argument("--fuel", type=int)
    p.add_argument("--encoding", choices=("bonsai", "classic"), default="bonsai")
    p.add_argument("--minimize", action="store_true")
    p.add_argument("--timeout", type=float, help="solver timeout in seconds")
    p.add_argument("--emit-smt", metavar="PATH")
    p.add_argument("--solver", help="solver binary (default: z3)")
    p.add_argument("--json", action="store_true", help="print the JSON report")
    p.add_argument("--expect-none", action="store_true", help="exit 1 if a witness is found")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="bonsai-checker", description="Bounded soundness checking of executable language models.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    check = sub.add_parser("check", help="search for a soundness counterexample")
    _query_flags(check)
    check.add_argument("--bug", help="bug to inject (e.g. arith-if, stlc-4)")

    diff = sub.add_parser("diff", help="program accepted by checker A but rejected by checker B")
    _query_flags(diff)
    diff.add_argument("--check-a", help="bug setting of checker A ('none' for the fixed checker)")
    diff.add_argument("--check-b", help="bug setting of checker B")

    bench = sub.add_parser("bench", help="run a benchmark and print CSV")
    bench.add_argument("suite", choices=("scaling", "bugsuite"))
    bench.add_argument("--lang", choices=sorted(LANGS), default="lam")
    bench.add_argument("--max-depth", type=int, default=30)
    bench.add_argument("--budget", type=float, default=60.0, help="scaling: seconds per encoding")
    bench.add_argument("--timeout", type=float, default=300.0, help="bugsuite: seconds per bug")
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--encoding", choices=("bonsai", "classic"), action="append")
    bench.add_argument("--no-minimize", action="store_true", help="bugsuite: skip the minimized runs")
    bench.add_argument("--table", action="store_true", help="bugsuite: also print a table to stderr")
    return ap


def _config(args, **extra) -> QueryConfig:
    return QueryConfig(
        lang=args.lang,
        depth=args.depth,
        fuel=args.fuel,
        minimize=args.minimize,
        timeout=args.timeout,
        encoding=args.encoding,
        emit_smt=args.emit_smt,
        solver=args.solver,
        **extra,
    )


def _run_query(args, kind: str, **extra) -> int:
    try:
        cfg = _config(args, **extra)
    except ValueError as e:
        print(f"bonsai-checker: error: {e}", file=sys.stderr)
        return EX_USAGE
    try:
        result = run_query(cfg, kind)
    except (SolverError, InternalSoundnessError, OSError) as e:
        print(f"bonsai-checker: {type(e).__name__}: {e}", file=sys.stderr)
        return EX_ERROR
    report = result.report()
    if args.json:
        print(json.dumps(report, sort_keys=True))
    else:
        print(f"status: {result.status}")
        if result.counterexample is not None:
            print(f"program: {report['program']}")
            print(f"size: {report['size']}")
            print(f"replay: {json.dumps(report['replay'], sort_keys=True)}")
        print(f"time: eval {report['eval_ms']:.0f} ms, solve {report['solve_ms']:.0f} ms")
    if result.status == "unknown":
        return EX_ERROR
    if args.expect_none and result.counterexample is not None:
        return EX_FOUND
    return EX_OK


def _bench(args) -> int:
    if args.suite == "scaling":
        encodings = tuple(args.encoding or ("bonsai", "classic"))
        trials = bench_scaling(args.lang, range(1, args.max_depth + 1), encodings, args.budget)
        sys.stdout.write(to_csv(trials))
        for enc in encodings:
            print(f"# {enc}: reached depth {reached_depth(trials, enc)}", file=sys.stderr)
        return EX_OK
    modes = (False,) if args.no_minimize else (False, True)
    trials, ok = bench_bugsuite(args.timeout, args.jobs, modes)
    sys.stdout.write(to_csv(trials))
    if args.table:
        print(suite_table(trials), file=sys.stderr)
    return EX_OK if ok else EX_ERROR


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.command == "check":
        return _run_query(args, "soundness", bug=args.bug)
    if args.command == "diff":
        return _run_query(args, "diff", check_a=args.check_a, check_b=args.check_b)
    return _bench(args)


if __name__ == "__main__":
    sys.exit(main())
