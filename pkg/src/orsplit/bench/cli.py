"""Command-line benchmark driver."""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys

from ..orframes import Strategy
from ..scheduler import Reposition, SchedulerConfig
from .harness import (BenchmarkSpec, emit_report, run_benchmark, sequential_fixture,
                      sequential_records)
from .programs import PROGRAMS


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="orsplit-bench",
                                 description="Time parallel runs against the sequential baseline.")
    ap.add_argument("--bench", required=True, choices=sorted(PROGRAMS))
    ap.add_argument("--size", required=True, type=int)
    ap.add_argument("--strategy", default="os", choices=[s.value for s in Strategy])
    ap.add_argument("--workers", default=1, type=int)
    ap.add_argument("--runs", default=10, type=int)
    ap.add_argument("--no-incremental", dest="incremental", action="store_false")
    ap.add_argument("--threshold", default=1, type=int)
    ap.add_argument("--policy", default=Reposition.NEAREST_BUSY.value,
                    choices=[p.value for p in Reposition])
    ap.add_argument("--watchdog", default=10.0, type=float,
                    help="abort a run after this multiple of the sequential time (0 disables)")
    ap.add_argument("--csv", metavar="PATH")
    ap.add_argument("--trace", metavar="PATH")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        spec = BenchmarkSpec.of(args.bench, args.size)
        config = SchedulerConfig(workers=args.workers, threshold=args.threshold,
                                 strategy=args.strategy, incremental=args.incremental,
                                 reposition_policy=Reposition(args.policy))
        spec.program()
    except ValueError as exc:
        print(f"orsplit-bench: {exc}", file=sys.stderr)
        return 2
    fixture = sequential_fixture(spec, args.runs)
    with contextlib.ExitStack() as stack:
        trace = stack.enter_context(open(args.trace, "w")) if args.trace else None
        records = run_benchmark(spec, config, args.runs, fixture,
                                args.watchdog or None, trace)
    failed = [r for r in records if not r.verified]
    for r in failed:
        print(f"FAILED run {r.run}: solutions_ok={r.solutions_ok} "
              f"leaves_ok={r.leaves_ok} terminated={r.terminated}", file=sys.stderr)
    report = emit_report(sequential_records(spec, fixture) + records)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report)
    sys.stdout.write(report)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
