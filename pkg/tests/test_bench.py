import csv
import io
import itertools
import json
import statistics
from collections import Counter

import pytest

from orsplit.bench import cli, harness
from orsplit.bench.harness import (BenchmarkSpec, RunRecord, emit_report, run_benchmark,
                                   sequential_fixture)
from orsplit.bench.programs import (MAZE_GOAL, MAZE_START, gen_ham, gen_maze, gen_nsort,
                                    gen_queens, make_program)
from orsplit.engine import run_sequential, sequential_state
from orsplit.scheduler import SchedulerConfig


def queens_oracle(n):
    return sorted(tuple(r + 1 for r in p) for p in itertools.permutations(range(n))
                  if len({p[i] + i for i in range(n)}) == n
                  and len({p[i] - i for i in range(n)}) == n)


def ham_oracle(n):
    nbrs = {v: set() for v in range(n)}
    for v in range(n):
        for u in ((v + 1) % n, (v + n // 2) % n):
            nbrs[v].add(u)
            nbrs[u].add(v)
    found = []

    def walk(path, seen):
        if len(path) == n:
            if 0 in nbrs[path[-1]]:
                found.append(tuple(path))
            return
        for u in sorted(nbrs[path[-1]] - seen):
            walk(path + [u], seen | {u})

    walk([0], {0})
    return sorted(found)


def maze_oracle(n, start, goal):
    deltas = {0: (-1, 0), 1: (1, 0), 2: (0, -1), 3: (0, 1)}
    out = []
    for seq in itertools.product(range(4), repeat=n):
        board = list(start)
        b = board.index(0)
        ok = True
        for m in seq:
            r, c = divmod(b, 4)
            dr, dc = deltas[m]
            if not (0 <= r + dr < 4 and 0 <= c + dc < 4):
                ok = False
                break
            t = (r + dr) * 4 + c + dc
            board[b], board[t] = board[t], 0
            b = t
        if ok and tuple(board) == tuple(goal):
            out.append(seq)
    return sorted(out)


@pytest.mark.parametrize("n", [4, 5, 6, 7, 8])
def test_queens_against_permutations(n):
    assert sorted(run_sequential(gen_queens(n))) == queens_oracle(n)


def test_queens_known_counts():
    assert len(run_sequential(gen_queens(4))) == 2
    assert len(run_sequential(gen_queens(8))) == 92
    with pytest.raises(ValueError):
        gen_queens(3)
    with pytest.raises(ValueError):
        gen_queens(14)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_nsort_single_sorted_solution(n):
    state = sequential_state(gen_nsort(n))
    assert state.solutions == [tuple(range(1, n + 1))]
    assert len(state.leaves) == sum(1 for _ in itertools.permutations(range(n)))


def test_nsort_eight_leaves_and_bounds():
    state = sequential_state(gen_nsort(8))
    assert len(state.leaves) == 40320
    assert len(sequential_state(gen_nsort(3)).leaves) > 1
    with pytest.raises(ValueError):
        gen_nsort(2)


@pytest.mark.parametrize("n", [4, 6, 8, 10, 12])
def test_ham_against_path_enumeration(n):
    assert sorted(run_sequential(gen_ham(n))) == ham_oracle(n)


def test_ham_four_is_complete_graph():
    # K4 has 3 undirected Hamiltonian cycles, each found in both directions
    assert len(run_sequential(gen_ham(4))) == 6


@pytest.mark.parametrize("n", [5, 7, 2])
def test_ham_rejects_bad_sizes(n):
    with pytest.raises(ValueError):
        gen_ham(n)


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_maze_against_exhaustive_sequences(n):
    assert sorted(run_sequential(gen_maze(n))) == maze_oracle(n, MAZE_START, MAZE_GOAL)


def test_maze_fixtures():
    one_away = list(MAZE_GOAL)
    one_away[14], one_away[15] = 0, one_away[14]
    assert run_sequential(gen_maze(1, start=one_away)) == [(3,)]
    assert run_sequential(gen_maze(0, start=MAZE_GOAL)) == [()]
    assert len(run_sequential(gen_maze(8))) >= 1
    with pytest.raises(ValueError):
        gen_maze(2, start=[0] * 16)


def test_make_program_rejects_unknown():
    with pytest.raises(ValueError):
        make_program("cubes", 3)


def test_spec_known_counts():
    assert BenchmarkSpec.of("queens", 8).expected_solutions == 92
    assert BenchmarkSpec.of("ham", 12).expected_solutions is None
    with pytest.raises(ValueError):
        BenchmarkSpec("magic", 3)


def test_run_benchmark_records_and_average():
    spec = BenchmarkSpec.of("queens", 8)
    recs = run_benchmark(spec, SchedulerConfig(workers=1), runs=10)
    assert len(recs) == 10
    assert all(r.verified and r.solutions == 92 for r in recs)
    report = emit_report(harness.sequential_records(spec, sequential_fixture(spec, 2)) + recs)
    rows = list(csv.DictReader(io.StringIO(report)))
    row = next(r for r in rows if r["strategy"] == "os")
    assert float(row["avg_seconds"]) == pytest.approx(
        statistics.fmean(r.seconds for r in recs), abs=1e-6)


def test_mismatched_fixture_marks_runs_failed():
    spec = BenchmarkSpec.of("queens", 6)
    fixture = sequential_fixture(spec)
    fixture.solutions = fixture.solutions + Counter({(9, 9): 1})
    recs = run_benchmark(spec, SchedulerConfig(workers=2), runs=2, fixture=fixture)
    assert not any(r.verified for r in recs)


def test_report_columns_and_speedup():
    recs = [RunRecord("b", "sequential", 1, False, 0, 2.0, 1),
            RunRecord("b", "vs", 4, True, 0, 0.5, 1, sharings=3, bytes_copied=100),
            RunRecord("b", "vs", 4, True, 1, 1.5, 1, sharings=5, bytes_copied=300)]
    rows = list(csv.DictReader(io.StringIO(emit_report(recs))))
    assert list(rows[0]) == harness.COLUMNS
    vs = rows[1]
    assert float(vs["avg_seconds"]) == 1.0
    assert float(vs["speedup"]) == 2.0 and float(vs["ratio_vs_sequential"]) == 0.5
    assert float(vs["sharings"]) == 4 and float(vs["bytes_copied"]) == 200


def test_report_errors():
    with pytest.raises(ValueError):
        emit_report([])
    with pytest.raises(ValueError):
        emit_report([RunRecord("b", "os", 2, True, 0, 1.0, 1)])


def test_cli_success_writes_csv_and_trace(tmp_path, capsys):
    out, trace = tmp_path / "r.csv", tmp_path / "t.jsonl"
    code = cli.main(["--bench", "queens", "--size", "7", "--strategy", "ds",
                     "--workers", "2", "--runs", "3", "--csv", str(out),
                     "--trace", str(trace)])
    assert code == 0
    assert out.read_text().splitlines()[0].split(",") == harness.COLUMNS
    for line in trace.read_text().splitlines():
        assert json.loads(line)["strategy"] == "ds"
    assert "queens(7)" in capsys.readouterr().out


def test_cli_exit_code_on_failure(monkeypatch):
    real = harness.sequential_fixture

    def broken(spec, runs=1):
        fx = real(spec, runs)
        fx.leaves = Counter()
        return fx

    monkeypatch.setattr(cli, "sequential_fixture", broken)
    assert cli.main(["--bench", "queens", "--size", "5", "--runs", "1"]) == 1


def test_cli_rejects_bad_size(capsys):
    assert cli.main(["--bench", "ham", "--size", "5"]) == 2
