"""Sequential depth-first engine over a trailed integer store.

A search program supplies ``expand`` and ``apply``; the engine owns the
choice-point stack, the trail and the store, and explores the tree
left-to-right, treating every solution as a failure so that all solutions
are enumerated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Hashable, Optional, Sequence

EXHAUSTED = -1
ROOT_NODE = 0
ROOT_ALT = 0


class _Solution:
    __slots__ = ()

    def __repr__(self):
        return "SOLUTION"


SOLUTION = _Solution()
#: expand() returns FAIL (None) or an empty sequence when a node dead-ends.
FAIL = None

TREE_EXHAUSTED = False
CONTINUE = True


class ContractViolation(RuntimeError):
    """An operation was invoked outside its contract."""


class Store:
    """Fixed-length integer cells plus the high-water mark of touched cells."""

    __slots__ = ("cells", "top_mark")

    def __init__(self, cells: Sequence[int], top_mark: int = 0):
        self.cells = list(cells)
        self.top_mark = top_mark

    def copy(self) -> "Store":
        return Store(self.cells, self.top_mark)

    def __len__(self):
        return len(self.cells)

    def __eq__(self, other):
        return (isinstance(other, Store) and self.cells == other.cells
                and self.top_mark == other.top_mark)

    def __repr__(self):
        return f"Store(top_mark={self.top_mark}, cells={self.cells!r})"


@dataclass
class SearchProgram:
    """A pluggable nondeterministic program.

    ``expand(cells)`` returns SOLUTION, FAIL/empty, or the sequence of
    alternatives at the current node. ``apply(state, alt)`` commits one
    alternative, writing only through ``state.write``; it returns False to
    fail the branch. ``solution(cells)`` extracts the hashable record stored
    for a solution.
    """

    name: str
    initial_store: Store
    expand: Callable[[list], Any]
    apply: Callable[[Any, Hashable], bool]
    solution: Callable[[list], Hashable] = tuple


class ChoicePoint:
    __slots__ = ("node_id", "alts", "cursor", "offset", "split_counter",
                 "or_frame", "trail_mark", "store_mark")

    def __init__(self, node_id, alts, trail_mark, store_mark, split_counter=1,
                 cursor=0, offset=1, or_frame=None):
        self.node_id = node_id
        self.alts = alts
        self.cursor = cursor
        self.offset = offset
        self.split_counter = split_counter
        self.or_frame = or_frame
        self.trail_mark = trail_mark
        self.store_mark = store_mark

    def clone(self) -> "ChoicePoint":
        return ChoicePoint(self.node_id, self.alts, self.trail_mark,
                           self.store_mark, self.split_counter, self.cursor,
                           self.offset, self.or_frame)

    @property
    def exhausted(self) -> bool:
        return self.cursor == EXHAUSTED

    def remaining(self) -> int:
        """Alternatives still reachable through the cursor with its stride."""
        c = self.cursor
        if c == EXHAUSTED:
            return 0
        return -(-(len(self.alts) - c) // self.offset)

    def remaining_indices(self) -> range:
        c = self.cursor
        if c == EXHAUSTED:
            return range(0)
        return range(c, len(self.alts), self.offset)

    def fields(self) -> tuple:
        return (self.node_id, tuple(self.alts), self.cursor, self.offset,
                self.split_counter, self.trail_mark, self.store_mark)

    def __repr__(self):
        return (f"ChoicePoint(node={self.node_id}, alts={list(self.alts)}, "
                f"cursor={self.cursor}, offset={self.offset}, "
                f"sc={self.split_counter}, shared={self.or_frame is not None})")


def take_next_owned_alternative(cp: ChoicePoint) -> int:
    """Return the index of the next owned alternative and advance by the stride.

    Returns EXHAUSTED (and marks the cursor) when the stride leaves the list.
    """
    c = cp.cursor
    if c == EXHAUSTED:
        return EXHAUSTED
    nxt = c + cp.offset
    cp.cursor = nxt if nxt < len(cp.alts) else EXHAUSTED
    return c


def child_node_id(parent_id: int, alt_index: int) -> int:
    # Tuple hashes of ints are deterministic across processes and runs.
    return hash((parent_id, alt_index))


class EngineState:
    """One worker's private stacks: choice points, trail and store."""

    def __init__(self, program: SearchProgram):
        self.program = program
        init = program.initial_store
        self.cells = list(init.cells)
        self.top_mark = init.top_mark
        self.trail: list[tuple[int, int]] = []
        self.cps: list[ChoicePoint] = []
        self.solutions: list = []
        self.leaves: list[tuple[int, int]] = []
        # identity of the node currently being executed: (parent node, alt index)
        self.current = (ROOT_NODE, ROOT_ALT)

    # -- store -----------------------------------------------------------
    def write(self, slot: int, value: int) -> None:
        cells = self.cells
        if slot < 0 or slot >= len(cells):
            raise IndexError(f"store slot {slot} out of range")
        self.trail.append((slot, cells[slot]))
        cells[slot] = value
        if slot >= self.top_mark:
            self.top_mark = slot + 1

    def unwind(self, trail_mark: int, store_mark: int) -> None:
        trail = self.trail
        cells = self.cells
        while len(trail) > trail_mark:
            slot, prev = trail.pop()
            cells[slot] = prev
        self.top_mark = store_mark

    @property
    def store(self) -> Store:
        return Store(self.cells, self.top_mark)

    @property
    def B(self) -> int:
        return len(self.cps) - 1

    # -- choice points ---------------------------------------------------
    def push_choice_point(self, alts: Sequence, node_id: Optional[int] = None) -> int:
        if not alts:
            raise ContractViolation("choice point needs at least one alternative")
        if node_id is None:
            node_id = child_node_id(*self.current)
        cps = self.cps
        sc = cps[-1].split_counter + 1 if cps else 1
        cps.append(ChoicePoint(node_id, alts, len(self.trail), self.top_mark, sc))
        return len(cps) - 1

    def push_root(self) -> ChoicePoint:
        """Create the driver's root choice point around the initial expand."""
        if self.cps:
            raise ContractViolation("root already present")
        cp = ChoicePoint(ROOT_NODE, (ROOT_ALT,), 0, self.top_mark, split_counter=0)
        self.cps.append(cp)
        return cp

    def record_leaf(self, solved: bool) -> None:
        self.leaves.append(self.current)
        if solved:
            self.solutions.append(self.program.solution(self.cells))

    def backtrack_private(self) -> bool:
        """Backtrack to the next alternative on a purely private stack.

        Returns CONTINUE once an alternative was applied successfully, or
        TREE_EXHAUSTED when no choice point has work left.
        """
        cps = self.cps
        apply = self.program.apply
        while cps:
            cp = cps[-1]
            self.unwind(cp.trail_mark, cp.store_mark)
            i = take_next_owned_alternative(cp)
            if i == EXHAUSTED:
                cps.pop()
                continue
            self.current = (cp.node_id, i)
            if cp.node_id == ROOT_NODE:
                return CONTINUE
            if apply(self, cp.alts[i]):
                return CONTINUE
            self.record_leaf(False)
        return TREE_EXHAUSTED

    def run(self) -> list:
        """Explore the whole tree; solutions are recorded then failed."""
        expand = self.program.expand
        if not self.cps:
            self.push_root()
        if self.backtrack_private() is TREE_EXHAUSTED:
            return self.solutions
        while True:
            out = expand(self.cells)
            if out is SOLUTION:
                self.record_leaf(True)
            elif out:
                self.push_choice_point(out)
                if self.backtrack_private():
                    continue
                break
            else:
                self.record_leaf(False)
            if not self.backtrack_private():
                break
        return self.solutions


def trailed_write(state: EngineState, slot: int, value: int) -> None:
    state.write(slot, value)


def run_sequential(program: SearchProgram) -> list:
    """Run ``program`` depth-first to completion and return all solutions."""
    return EngineState(program).run()


def sequential_state(program: SearchProgram) -> EngineState:
    state = EngineState(program)
    state.run()
    return state
