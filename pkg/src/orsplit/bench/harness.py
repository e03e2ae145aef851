"""Repeated timed runs verified against a sequential fixture, and CSV reports."""

from __future__ import annotations

import csv
import io
import json
import statistics
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..engine import sequential_state
from ..orframes import Strategy
from ..scheduler import Runtime, SchedulerConfig
from .programs import PROGRAMS, make_program

SEQUENTIAL = "sequential"

# solution counts known independently of this package
KNOWN_SOLUTIONS = {
    "queens": {4: 2, 5: 10, 6: 4, 7: 40, 8: 92, 9: 352, 10: 724, 11: 2680,
               12: 14200, 13: 73712},
    "nsort": {n: 1 for n in range(3, 13)},
}


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    size: int
    expected_solutions: Optional[int] = None

    def __post_init__(self):
        if self.name not in PROGRAMS:
            raise ValueError(f"unknown benchmark {self.name!r}")

    @classmethod
    def of(cls, name: str, size: int) -> "BenchmarkSpec":
        return cls(name, size, KNOWN_SOLUTIONS.get(name, {}).get(size))

    @property
    def label(self) -> str:
        return f"{self.name}({self.size})"

    def program(self):
        return make_program(self.name, self.size)


@dataclass
class Fixture:
    """Sequential reference: solution and leaf multisets plus timings."""

    solutions: Counter
    leaves: Counter
    seconds: list = field(default_factory=list)

    @property
    def avg_seconds(self) -> float:
        return statistics.fmean(self.seconds)


@dataclass
class RunRecord:
    benchmark: str
    strategy: str
    workers: int
    incremental: bool
    run: int
    seconds: float
    solutions: int
    sharings: int = 0
    bytes_copied: int = 0
    frames_allocated: int = 0
    solutions_ok: bool = True
    leaves_ok: bool = True
    terminated: bool = True

    @property
    def verified(self) -> bool:
        return self.solutions_ok and self.leaves_ok and self.terminated


def sequential_fixture(spec: BenchmarkSpec, runs: int = 1) -> Fixture:
    program = spec.program()
    fixture = None
    for _ in range(max(1, runs)):
        t0 = time.perf_counter()
        state = sequential_state(program)
        dt = time.perf_counter() - t0
        if fixture is None:
            fixture = Fixture(Counter(state.solutions), Counter(state.leaves))
        fixture.seconds.append(dt)
    if spec.expected_solutions is not None:
        found = sum(fixture.solutions.values())
        if found != spec.expected_solutions:
            raise AssertionError(f"{spec.label}: sequential run found {found} "
                                 f"solutions, expected {spec.expected_solutions}")
    return fixture


def sequential_records(spec: BenchmarkSpec, fixture: Fixture) -> list:
    n = sum(fixture.solutions.values())
    return [RunRecord(spec.label, SEQUENTIAL, 1, False, i, dt, n)
            for i, dt in enumerate(fixture.seconds)]


def run_benchmark(spec: BenchmarkSpec, config: SchedulerConfig, runs: int = 10,
                  fixture: Optional[Fixture] = None, watchdog_factor: float = 10.0,
                  trace=None) -> list:
    """Run ``runs`` repetitions, each checked against the sequential fixture.

    ``trace`` is an optional writable text stream receiving one JSON line per
    sharing event.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if fixture is None:
        fixture = sequential_fixture(spec)
    program = spec.program()
    timeout = watchdog_factor * fixture.avg_seconds if watchdog_factor else None
    records = []
    for i in range(runs):
        result = Runtime(program, config).run(timeout=timeout, run_index=i)
        records.append(RunRecord(
            benchmark=spec.label,
            strategy=config.strategy.value,
            workers=config.workers,
            incremental=config.incremental,
            run=i,
            seconds=result.seconds,
            solutions=len(result.solutions),
            sharings=result.sharings,
            bytes_copied=result.bytes_copied,
            frames_allocated=result.frames_allocated,
            solutions_ok=Counter(result.solutions) == fixture.solutions,
            leaves_ok=Counter(result.leaves) == fixture.leaves,
            terminated=result.terminated,
        ))
        if trace is not None:
            for ev in result.events:
                trace.write(json.dumps(ev) + "\n")
    return records


COLUMNS = ["benchmark", "strategy", "workers", "incremental", "avg_seconds",
           "ratio_vs_sequential", "speedup", "sharings", "bytes_copied"]


def emit_report(records: Iterable[RunRecord]) -> str:
    """CSV summary with one row per configuration, relative to the sequential runs."""
    records = list(records)
    if not records:
        raise ValueError("no records to report")
    groups: dict = {}
    for r in records:
        groups.setdefault((r.benchmark, r.strategy, r.workers, r.incremental), []).append(r)
    baseline = {}
    for (bench, strategy, _, _), rs in groups.items():
        if strategy == SEQUENTIAL:
            baseline[bench] = statistics.fmean(r.seconds for r in rs)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COLUMNS)
    for (bench, strategy, workers, incremental), rs in groups.items():
        if bench not in baseline:
            raise ValueError(f"no sequential baseline for {bench}")
        avg = statistics.fmean(r.seconds for r in rs)
        base = baseline[bench]
        writer.writerow([
            bench, strategy, workers, str(incremental).lower(), f"{avg:.6f}",
            f"{avg / base:.4f}" if base else "inf",
            f"{base / avg:.4f}" if avg else "inf",
            round(statistics.fmean(r.sharings for r in rs), 2),
            round(statistics.fmean(r.bytes_copied for r in rs), 1),
        ])
    return out.getvalue()


def strategies() -> list:
    return [s.value for s in Strategy]
