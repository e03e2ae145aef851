"""Stack copying between a sharing worker P and a requester Q."""

from __future__ import annotations

from dataclasses import dataclass

from .orframes import WorkerState

CELL_BYTES = 8
TRAIL_ENTRY_BYTES = 16
CP_HEADER_BYTES = 64
ALT_BYTES = 8


def cp_bytes(cp) -> int:
    return CP_HEADER_BYTES + ALT_BYTES * len(cp.alts)


@dataclass(frozen=True)
class CopySegments:
    cp_range: range
    store_range: range
    trail_range: range
    bytes: int
    incremental: bool
    # Q only backtracks to its new top; nothing is copied from P
    relocation: bool = False


def compute_copy_segments(P: WorkerState, Q: WorkerState, new_top: int,
                          incremental: bool) -> CopySegments:
    """Ranges of P's stacks that Q needs to resume at ``new_top``.

    ``new_top`` is the index of Q's youngest choice point after sharing. Q is
    positioned at its own youngest choice point, which lies on P's branch.
    """
    pe = P.engine
    if not incremental:
        cpr = range(0, new_top + 1)
        sr = range(0, pe.top_mark)
        tr = range(0, len(pe.trail))
    else:
        x = Q.engine.B
        if new_top <= x:
            empty = range(0)
            return CopySegments(empty, empty, empty, 0, True, relocation=True)
        common = pe.cps[x]
        bound = pe.cps[new_top + 1].store_mark if new_top < pe.B else pe.top_mark
        cpr = range(x + 1, new_top + 1)
        sr = range(common.store_mark, max(common.store_mark, bound))
        # trail copied from the common node exactly as for the original strategy
        tr = range(common.trail_mark, len(pe.trail))
    nbytes = (sum(cp_bytes(pe.cps[i]) for i in cpr) + CELL_BYTES * len(sr)
              + TRAIL_ENTRY_BYTES * len(tr))
    return CopySegments(cpr, sr, tr, nbytes, incremental)


def perform_copy(P: WorkerState, Q: WorkerState, seg: CopySegments) -> None:
    if seg.relocation:
        return
    pe, qe = P.engine, Q.engine
    if not seg.incremental:
        qe.cps = [pe.cps[i].clone() for i in seg.cp_range]
        qe.cells = list(pe.cells)
        qe.top_mark = pe.top_mark
        qe.trail = list(pe.trail)
    else:
        del qe.cps[seg.cp_range.start:]
        qe.cps.extend(pe.cps[i].clone() for i in seg.cp_range)
        lo, hi = seg.store_range.start, seg.store_range.stop
        qe.cells[lo:hi] = pe.cells[lo:hi]
        qe.top_mark = hi
        del qe.trail[seg.trail_range.start:]
        qe.trail.extend(pe.trail[seg.trail_range.start:seg.trail_range.stop])
    Q.bytes_copied += seg.bytes


def install_bindings(P: WorkerState, Q: WorkerState, seg: CopySegments) -> int:
    """Replay P's bindings to cells of the common, non-copied store region.

    Returns the number of cells installed.
    """
    if seg.relocation or not seg.incremental:
        return 0
    pcells, qcells = P.engine.cells, Q.engine.cells
    limit = seg.store_range.start
    n = 0
    for slot, _ in P.engine.trail[seg.trail_range.start:seg.trail_range.stop]:
        if slot < limit:
            qcells[slot] = pcells[slot]
            n += 1
    return n


def backtrack_only_relocation(Q: WorkerState, new_top: int) -> int:
    """Move Q up to ``new_top`` without copying; returns frames left."""
    qe = Q.engine
    left = 0
    while len(qe.cps) - 1 > new_top:
        cp = qe.cps.pop()
        if cp.or_frame is not None:
            cp.or_frame.remove_member(Q.id)
            left += 1
    cp = qe.cps[-1]
    qe.unwind(cp.trail_mark, cp.store_mark)
    return left


def checking_phase(P: WorkerState, Q: WorkerState, upto: int) -> int:
    """Revalidate Q's non-copied choice points 1..upto against P's view.

    Cursor, stride and split counter are taken from the owning chain, which at
    sharing time is P's. Returns the number of choice points that changed.
    """
    changed = 0
    pcps, qcps = P.engine.cps, Q.engine.cps
    for i in range(1, upto + 1):
        p, q = pcps[i], qcps[i]
        if q.node_id != p.node_id:
            raise RuntimeError(f"requester branch diverges from sharer at depth {i}")
        if (q.cursor, q.offset, q.split_counter) != (p.cursor, p.offset, p.split_counter):
            q.cursor, q.offset, q.split_counter = p.cursor, p.offset, p.split_counter
            changed += 1
    return changed


def resume_snapshot(engine) -> tuple:
    """State Q resumes from: stacks with the trail unwound to its youngest choice point."""
    cp = engine.cps[-1]
    cells = list(engine.cells)
    trail = engine.trail
    for slot, prev in reversed(trail[cp.trail_mark:]):
        cells[slot] = prev
    return (tuple(cells), cp.store_mark, tuple(trail[:cp.trail_mark]),
            tuple(c.fields() for c in engine.cps),
            tuple(None if c.or_frame is None else c.or_frame.node_id
                  for c in engine.cps))
