"""The four stack-splitting procedures.

Each function runs inside a sharing rendezvous. ``P`` is the sharing
(busy) worker and ``Q`` the requester. Vertical and half splitting divide
whole choice points and record ownership through ``nearest_livenode``
chains; horizontal and diagonal splitting divide alternatives by doubling
choice-point strides.
"""

from __future__ import annotations

from .engine import EXHAUSTED, ContractViolation
from .orframes import DEAD_END, WorkerState, alloc_or_frame


def get_next_alternative(alt: int, offset: int, n_alts: int) -> int:
    nxt = alt + offset
    return nxt if nxt < n_alts else EXHAUSTED


# -- vertical ---------------------------------------------------------------

def split_vertical(P: WorkerState, Q: WorkerState) -> list:
    """Allocate frames for P's private nodes and build two alternating chains.

    Returns the frames allocated, youngest first.
    """
    cps = P.engine.cps
    top_or_frame = P.top_or_frame
    root_frame = cps[0].or_frame
    if top_or_frame is not root_frame and top_or_frame is not P.chain_head:
        raise ContractViolation("vertical split needs P's top frame to head its chain")
    created = []
    next_fr = nearest_fr = None
    current_fr = None
    i = len(cps) - 1
    while i != P.top_cp:
        current_fr = alloc_or_frame(cps[i], P.id, i)
        created.append(current_fr)
        if next_fr is not None:
            next_fr.next = current_fr
            current_fr.add_member(Q.id)
        if nearest_fr is not None:
            nearest_fr.nearest_livenode = current_fr
        nearest_fr = next_fr
        next_fr = current_fr
        i -= 1

    link = DEAD_END if top_or_frame is root_frame else top_or_frame
    if next_fr is not None:
        next_fr.nearest_livenode = link
        next_fr.next = top_or_frame
    if nearest_fr is not None:
        nearest_fr.nearest_livenode = link

    # continue alternating over the older shared chain
    if next_fr is None:
        current_fr = top_or_frame
    nearest = current_fr.nearest_livenode
    while nearest is not DEAD_END:
        current_fr.nearest_livenode = nearest.nearest_livenode
        current_fr = nearest
        nearest = current_fr.nearest_livenode
    return created


def vertical_requester_top(P: WorkerState) -> int:
    """Index of the choice point that heads Q's chain after a vertical split."""
    cps = P.engine.cps
    if len(cps) - 1 > P.top_cp:
        return len(cps) - 2
    nl = P.top_or_frame.nearest_livenode
    if nl is DEAD_END:
        return 0
    return nl.depth


# -- half -------------------------------------------------------------------

def half_middle(P: WorkerState) -> int:
    """Index of the middle choice point, without modifying any counter."""
    cps = P.engine.cps
    i = len(cps) - 1
    split_number = cps[i].split_counter // 2
    while cps[i].split_counter != split_number + 1:
        i -= 1
        if i <= 0:
            raise ContractViolation("split counters are not consecutive")
    return i


def split_half(P: WorkerState, Q: WorkerState) -> list:
    """Hand the older half of P's numbered chain to Q.

    Returns the frames allocated (only when the middle node is private).
    """
    cps = P.engine.cps
    i = len(cps) - 1
    split_number = cps[i].split_counter // 2
    while cps[i].split_counter != split_number + 1:
        cps[i].split_counter -= split_number
        i -= 1
        if i <= 0:
            raise ContractViolation("split counters are not consecutive")
    cps[i].split_counter = 1
    middle = i

    middle_fr = cps[middle].or_frame
    created = []
    if middle_fr is not None:
        middle_fr.nearest_livenode = DEAD_END
        current_fr = P.top_or_frame
        while current_fr is not middle_fr:
            current_fr.remove_member(Q.id)
            current_fr = current_fr.next
        return created

    # the private nodes older than the middle go to Q
    link = P.chain_head
    prev = None
    for j in range(middle - 1, P.top_cp, -1):
        fr = alloc_or_frame(cps[j], P.id, j)
        fr.add_member(Q.id)
        if prev is not None:
            prev.next = fr
            prev.nearest_livenode = fr
        prev = fr
        created.append(fr)
    if prev is not None:
        prev.next = P.top_or_frame
        prev.nearest_livenode = link
    P.chain_head = DEAD_END
    return created


# -- horizontal / diagonal ----------------------------------------------------

def adjust_horizontal(cps, top_cp: int, sharing: bool) -> None:
    adjust = sharing
    i = top_cp
    while i != 0:
        cp = cps[i]
        alt = cp.cursor
        if alt != EXHAUSTED:
            offset = cp.offset
            cp.offset = offset * 2
            if adjust:
                cp.cursor = get_next_alternative(alt, offset, len(cp.alts))
        i -= 1
        adjust = not adjust


def adjust_diagonal(cps, top_cp: int, sharing: bool) -> None:
    adjust = sharing
    i = top_cp
    while i != 0:
        cp = cps[i]
        alt = cp.cursor
        if alt != EXHAUSTED:
            offset = cp.offset
            cp.offset = offset * 2
            if adjust:
                cp.cursor = get_next_alternative(alt, offset, len(cp.alts))
            # alternatives visible under the stride in force before doubling
            n_alts = -(-(len(cp.alts) - alt) // offset)
            if n_alts % 2 != 0:
                adjust = not adjust
        i -= 1


def split_horizontal(P: WorkerState, Q: WorkerState) -> None:
    adjust_horizontal(P.engine.cps, P.top_cp, True)
    adjust_horizontal(Q.engine.cps, Q.top_cp, False)


def split_diagonal(P: WorkerState, Q: WorkerState) -> None:
    adjust_diagonal(P.engine.cps, P.top_cp, True)
    adjust_diagonal(Q.engine.cps, Q.top_cp, False)
