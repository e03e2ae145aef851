import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orsplit.engine import (EXHAUSTED, SOLUTION, ChoicePoint, ContractViolation,
                            EngineState, SearchProgram, Store, child_node_id,
                            run_sequential, sequential_state,
                            take_next_owned_alternative)
from scenarios import dfs_leaves, random_shape, tree_program


def test_store_write_is_trailed_and_raises_out_of_range():
    eng = EngineState(SearchProgram("t", Store([0, 0, 0]), lambda c: None,
                                    lambda s, a: True))
    eng.write(2, 7)
    assert eng.trail == [(2, 0)]
    assert eng.top_mark == 3
    with pytest.raises(IndexError):
        eng.write(3, 1)
    eng.unwind(0, 0)
    assert eng.cells == [0, 0, 0] and eng.top_mark == 0


def test_cursor_stride_walk():
    cp = ChoicePoint(1, tuple("abcdefg"), 0, 0, cursor=1, offset=3)
    taken = []
    while (i := take_next_owned_alternative(cp)) != EXHAUSTED:
        taken.append(i)
    assert taken == [1, 4]
    assert cp.exhausted and cp.remaining() == 0


@given(st.integers(1, 12), st.integers(0, 11), st.integers(1, 8))
def test_remaining_matches_stride_enumeration(n, c, off):
    c = min(c, n - 1)
    cp = ChoicePoint(1, tuple(range(n)), 0, 0, cursor=c, offset=off)
    expected = list(range(n))[c::off]
    assert cp.remaining() == len(expected)
    assert list(cp.remaining_indices()) == expected


def test_root_push_twice_is_rejected():
    eng = EngineState(tree_program({(): 2}))
    eng.push_root()
    with pytest.raises(ContractViolation):
        eng.push_root()


def test_empty_alternatives_rejected():
    eng = EngineState(tree_program({(): 2}))
    eng.push_root()
    with pytest.raises(ContractViolation):
        eng.push_choice_point([])


def test_split_counters_increase_along_branch():
    eng = EngineState(tree_program({(): 2}))
    eng.push_root()
    for _ in range(3):
        eng.push_choice_point([0, 1])
    assert [cp.split_counter for cp in eng.cps] == [0, 1, 2, 3]


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=40))
def test_sequential_run_visits_leaves_in_dfs_order(counts):
    shape = random_shape(counts)
    state = sequential_state(tree_program(shape))
    expected = dfs_leaves(shape)
    assert state.solutions == [p for p in expected if sum(p) % 2 == 0]
    assert len(state.leaves) == len(expected)
    assert len(set(state.leaves)) == len(state.leaves)


def test_trivial_root_solution():
    prog = SearchProgram("unit", Store([0]), lambda c: SOLUTION, lambda s, a: True)
    assert run_sequential(prog) == [(0,)]


def test_failed_apply_counts_as_leaf():
    def apply(state, alt):
        state.write(0, alt)
        return alt != 1

    prog = SearchProgram("f", Store([0]), lambda c: [1, 2] if c[0] == 0 else SOLUTION, apply)
    state = sequential_state(prog)
    assert state.solutions == [(2,)]
    assert len(state.leaves) == 2


def test_store_restored_after_full_run():
    counts = [3, 2, 2, 0, 1, 2, 2]
    prog = tree_program(random_shape(counts))
    state = sequential_state(prog)
    assert state.cells == prog.initial_store.cells
    assert state.trail == []


def test_node_ids_are_deterministic():
    assert child_node_id(5, 2) == child_node_id(5, 2)
    ids = {child_node_id(p, a) for p, a in itertools.product(range(20), range(5))}
    assert len(ids) == 100
