from .harness import (BenchmarkSpec, Fixture, RunRecord, emit_report, run_benchmark,
                      sequential_fixture, sequential_records)
from .programs import gen_ham, gen_maze, gen_nsort, gen_queens, make_program

__all__ = [
    "BenchmarkSpec", "Fixture", "RunRecord", "emit_report", "run_benchmark",
    "sequential_fixture", "sequential_records",
    "gen_ham", "gen_maze", "gen_nsort", "gen_queens", "make_program",
]
