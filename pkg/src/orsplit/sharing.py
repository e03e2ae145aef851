"""The work-sharing rendezvous between a busy worker P and an idle worker Q.

Stages: frame allocation for P's private nodes (the sharing loop, or the
strategy's own allocation for vertical/half splitting), membership update,
stack copy with installation or backtrack-only relocation, the strategy's
split of the unexplored alternatives, and computing both workers' top
frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import EXHAUSTED, ContractViolation
from .orframes import DEAD_END, Mode, Strategy, WorkerState, alloc_or_frame
from .splitting import (adjust_diagonal, adjust_horizontal, half_middle,
                        split_diagonal, split_half, split_horizontal,
                        split_vertical, vertical_requester_top)
from .stackcopy import (CopySegments, backtrack_only_relocation, checking_phase,
                        compute_copy_segments, install_bindings, perform_copy)


class SharingDenied(Exception):
    pass


@dataclass(frozen=True)
class SplitOutcome:
    """Who owns which (node, alternative) pairs right after sharing.

    ``shared`` holds alternatives made public through or-frames (original
    strategy only); they are claimed later under the frame guard.
    """

    before: frozenset
    p: frozenset
    q: frozenset
    shared: frozenset = field(default_factory=frozenset)

    @property
    def complementary(self) -> bool:
        p, q, s = self.p, self.q, self.shared
        return (not (p & q) and not (p & s) and not (q & s)
                and (p | q | s) == self.before)


@dataclass
class ShareReport:
    outcome: SplitOutcome | None
    segments: CopySegments
    new_top: int
    frames_allocated: int
    installed: int


# -- feasibility ---------------------------------------------------------------

def requester_top(P: WorkerState) -> int:
    """Index of Q's youngest choice point once P shares, computed before splitting."""
    s = P.strategy
    if s is Strategy.VS:
        return vertical_requester_top(P)
    if s is Strategy.HALF:
        return half_middle(P) - 1
    return P.engine.B


def preview_requester_load(P: WorkerState) -> int:
    """Alternatives Q would own (or, for OS, reach) if P shared now."""
    s = P.strategy
    if s is Strategy.OS:
        return P.load
    if s is Strategy.VS:
        seq = list(P.owned_cps())
        return sum(cp.remaining() for cp in seq[1::2])
    if s is Strategy.HALF:
        seq = list(P.owned_cps())
        n = P.engine.cps[-1].split_counter
        if n != len(seq):
            raise ContractViolation(f"half chain of {len(seq)} nodes numbered up to {n}")
        return sum(cp.remaining() for cp in seq[n - n // 2:])
    cps = [cp.clone() for cp in P.engine.cps]
    adjust = adjust_horizontal if s is Strategy.HS else adjust_diagonal
    adjust(cps, len(cps) - 1, False)
    return sum(cp.remaining() for cp in cps[1:])


def check_request(P: WorkerState, Q: WorkerState, threshold: int) -> str | None:
    """Reason to deny Q's request, or None when P can share."""
    if P is Q:
        return "self"
    if P.load <= threshold:
        return "load"
    x = Q.engine.B
    pcps = P.engine.cps
    if x >= len(pcps) or pcps[x].node_id != Q.engine.cps[x].node_id:
        return "branch"
    if preview_requester_load(P) == 0:
        return "empty"
    return None


# -- stages --------------------------------------------------------------------

def sharing_loop(P: WorkerState, Q: WorkerState) -> list:
    """Give every private node of P an or-frame with both workers as members."""
    cps = P.engine.cps
    public_links = P.strategy is Strategy.OS
    created = []
    prev = None
    for i in range(len(cps) - 1, P.top_cp, -1):
        fr = alloc_or_frame(cps[i], P.id, i)
        fr.add_member(Q.id)
        if prev is not None:
            prev.next = fr
            if public_links:
                prev.nearest_livenode = fr
        prev = fr
        created.append(fr)
    if prev is not None:
        prev.next = P.top_or_frame
        if public_links:
            prev.nearest_livenode = P.top_or_frame
    return created


def membership_update(P: WorkerState, Q: WorkerState, old_top_cp: int, q_pos: int) -> int:
    """Add Q to P's old frames between P's old top and Q's position."""
    cps = P.engine.cps
    n = 0
    for i in range(old_top_cp, q_pos, -1):
        fr = cps[i].or_frame
        if fr is not None and not fr.has_member(Q.id):
            fr.add_member(Q.id)
            n += 1
    return n


def youngest_shared(cps) -> int:
    i = len(cps) - 1
    while cps[i].or_frame is None:
        i -= 1
    return i


def compute_top_or_frames(P: WorkerState, Q: WorkerState, new_top: int) -> None:
    pcps = P.engine.cps
    P.top_cp = youngest_shared(pcps)
    P.top_or_frame = pcps[P.top_cp].or_frame
    Q.top_cp = new_top
    Q.top_or_frame = Q.engine.cps[new_top].or_frame
    s = P.strategy
    if s is Strategy.VS:
        P.chain_head = P.top_or_frame if P.top_cp else DEAD_END
        Q.chain_head = Q.top_or_frame
    elif s is Strategy.HALF:
        Q.chain_head = Q.top_or_frame


def trim_requester_membership(P: WorkerState, Q: WorkerState, new_top: int) -> None:
    cps = P.engine.cps
    for i in range(new_top + 1, len(cps)):
        fr = cps[i].or_frame
        if fr is not None and fr.has_member(Q.id):
            fr.remove_member(Q.id)


def share_work(P: WorkerState, Q: WorkerState, incremental: bool = True,
               threshold: int = 1, verify: bool = False) -> ShareReport:
    """Run the full sharing rendezvous; both workers must be quiescent."""
    reason = check_request(P, Q, threshold)
    if reason is not None:
        raise SharingDenied(reason)
    strategy = P.strategy
    before = P.owned_set() if verify else None
    q_pos = Q.engine.B
    old_top = P.top_cp
    new_top = requester_top(P)

    if strategy is Strategy.VS:
        created = split_vertical(P, Q)
        membership_update(P, Q, old_top, q_pos)
    elif strategy is Strategy.HALF:
        membership_update(P, Q, old_top, q_pos)
        created = split_half(P, Q)
    else:
        created = sharing_loop(P, Q)
        membership_update(P, Q, old_top, q_pos)
    if strategy.strided or strategy is Strategy.OS:
        P.top_cp = P.engine.B
        P.top_or_frame = P.engine.cps[-1].or_frame

    seg = compute_copy_segments(P, Q, new_top, incremental)
    installed = 0
    if seg.relocation:
        backtrack_only_relocation(Q, new_top)
        checking_phase(P, Q, new_top)
    else:
        perform_copy(P, Q, seg)
        if incremental:
            installed = install_bindings(P, Q, seg)
            checking_phase(P, Q, min(q_pos, new_top))

    compute_top_or_frames(P, Q, new_top)
    if strategy is Strategy.HS:
        split_horizontal(P, Q)
    elif strategy is Strategy.DS:
        split_diagonal(P, Q)
    trim_requester_membership(P, Q, new_top)

    P.load = P.recount_load()
    Q.load = Q.recount_load()
    P.sharings += 1
    P.frames_allocated += len(created)
    Q.mode = Mode.ENGINE

    outcome = None
    if verify:
        shared = frozenset()
        if strategy is Strategy.OS:
            shared = frozenset((fr.node_id, fr.alts[i]) for fr in created
                               if fr.shared_cursor != EXHAUSTED
                               for i in range(fr.shared_cursor, len(fr.alts)))
        outcome = SplitOutcome(before, P.owned_set(), Q.owned_set(), shared)
    return ShareReport(outcome, seg, new_top, len(created), installed)
