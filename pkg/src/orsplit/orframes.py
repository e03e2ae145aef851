"""Shared or-frames and per-worker runtime state."""

from __future__ import annotations

import enum
import threading
from typing import Optional

from .engine import EXHAUSTED, ChoicePoint, ContractViolation, EngineState

MAX_WORKERS = 64


class _Link:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


DEAD_END = _Link("DEAD_END")
UNSET = _Link("UNSET")


class Strategy(enum.Enum):
    OS = "os"
    VS = "vs"
    HALF = "half"
    HS = "hs"
    DS = "ds"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        return cls(text.lower())

    @property
    def chained(self) -> bool:
        """Whole-node ownership tracked through nearest_livenode chains."""
        return self in (Strategy.VS, Strategy.HALF)

    @property
    def strided(self) -> bool:
        return self in (Strategy.HS, Strategy.DS)


class Mode(enum.Enum):
    ENGINE = "engine"
    SCHEDULING = "scheduling"


class OrFrame:
    """The shared side of a choice point once it has been made public."""

    __slots__ = ("node_id", "depth", "shared_cursor", "alts", "next",
                 "nearest_livenode", "member_mask", "guard", "retired")

    def __init__(self, node_id, depth, alts, shared_cursor, owner: int):
        self.node_id = node_id
        self.depth = depth
        self.alts = alts
        self.shared_cursor = shared_cursor
        self.next: Optional[OrFrame] = None
        self.nearest_livenode = UNSET
        self.member_mask = 1 << owner
        self.guard = threading.Lock()
        self.retired = False

    @property
    def members(self) -> frozenset:
        mask = self.member_mask
        return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)

    def has_member(self, wid: int) -> bool:
        return bool(self.member_mask >> wid & 1)

    def add_member(self, wid: int) -> None:
        with self.guard:
            self.member_mask |= 1 << wid

    def remove_member(self, wid: int) -> None:
        with self.guard:
            self.member_mask &= ~(1 << wid)
            if not self.member_mask:
                self.retired = True

    def __repr__(self):
        return (f"OrFrame(node={self.node_id}, depth={self.depth}, "
                f"members={sorted(self.members)})")


def make_root_frame(root_cp: ChoicePoint, workers: int) -> OrFrame:
    frame = OrFrame(root_cp.node_id, 0, root_cp.alts, EXHAUSTED, 0)
    frame.member_mask = (1 << workers) - 1
    frame.nearest_livenode = DEAD_END
    root_cp.or_frame = frame
    return frame


def alloc_or_frame(cp: ChoicePoint, owner: int, depth: int) -> OrFrame:
    if cp.or_frame is not None:
        raise ContractViolation("choice point already has an or-frame")
    frame = OrFrame(cp.node_id, depth, cp.alts, cp.cursor, owner)
    cp.or_frame = frame
    return frame


def shared_take_alternative(frame: OrFrame, wid: int) -> int:
    """Claim the next shared alternative index; exactly one taker per index."""
    with frame.guard:
        if not frame.member_mask >> wid & 1:
            raise ContractViolation(f"worker {wid} is not a member of {frame!r}")
        c = frame.shared_cursor
        if c == EXHAUSTED:
            return EXHAUSTED
        frame.shared_cursor = c + 1 if c + 1 < len(frame.alts) else EXHAUSTED
        return c


def nearest_live_walk(start: OrFrame) -> list:
    """Frames reachable from ``start`` through nearest_livenode links."""
    if start.nearest_livenode is UNSET:
        raise ContractViolation("walk started on an unset nearest_livenode")
    out = []
    fr = start.nearest_livenode
    while fr is not DEAD_END:
        if fr is UNSET:
            raise ContractViolation("unset nearest_livenode inside a chain")
        out.append(fr)
        fr = fr.nearest_livenode
    return out


class WorkerState:
    """A worker: its engine plus the registers delimiting its shared region."""

    def __init__(self, wid: int, engine: EngineState, strategy: Strategy):
        if wid >= MAX_WORKERS:
            raise ValueError(f"at most {MAX_WORKERS} workers")
        self.id = wid
        self.engine = engine
        self.strategy = strategy
        self.top_cp = 0
        self.top_or_frame: Optional[OrFrame] = None
        # youngest owned shared frame under chained strategies
        self.chain_head = DEAD_END
        self.load = 0
        self.mode = Mode.SCHEDULING
        # counters
        self.sharings = 0
        self.bytes_copied = 0
        self.frames_allocated = 0

    def __repr__(self):
        return f"Worker({self.id}, mode={self.mode.value}, load={self.load})"

    # -- ownership -------------------------------------------------------
    def owned_cps(self):
        """Choice points whose cursors this worker exclusively consumes."""
        strategy = self.strategy
        chain = self.chain_head
        for cp in reversed(self.engine.cps):
            fr = cp.or_frame
            if fr is None:
                yield cp
            elif strategy is Strategy.OS:
                continue
            elif strategy.strided:
                yield cp
            elif fr is chain:
                yield cp
                chain = fr.nearest_livenode
                if chain is UNSET:
                    raise ContractViolation(f"unset link in chain at {fr!r}")

    def recount_load(self) -> int:
        return sum(cp.remaining() for cp in self.owned_cps())

    def owned_set(self) -> frozenset:
        return frozenset((cp.node_id, cp.alts[i]) for cp in self.owned_cps()
                         for i in cp.remaining_indices())

    def branch_frames(self):
        return [cp.or_frame for cp in self.engine.cps if cp.or_frame is not None]


def leave_node(worker: WorkerState, frame: OrFrame) -> None:
    """Drop ``worker`` from ``frame`` and move its top frame to the next older one."""
    frame.remove_member(worker.id)
    if worker.top_or_frame is frame:
        nxt = frame.next
        worker.top_or_frame = nxt
        worker.top_cp = nxt.depth if nxt is not None else 0
