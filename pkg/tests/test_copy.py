import pytest

from orsplit.orframes import Strategy
from orsplit.sharing import requester_top, share_work
from orsplit.stackcopy import (CELL_BYTES, backtrack_only_relocation, checking_phase,
                               compute_copy_segments, cp_bytes, resume_snapshot)
from scenarios import climb_to, exhaust_owned, make_team, push_cp, reference_team, rendezvous


def test_vertical_reference_range():
    P, Q = reference_team("vs")
    seg = compute_copy_segments(P, Q, requester_top(P), True)
    assert seg.cp_range == range(1, 4)


def test_half_reference_range():
    P, Q = reference_team("half")
    seg = compute_copy_segments(P, Q, requester_top(P), True)
    assert seg.cp_range == range(1, 3)


def test_full_copy_covers_everything():
    P, Q = reference_team("hs")
    seg = compute_copy_segments(P, Q, P.engine.B, False)
    assert seg.cp_range == range(0, 5)
    assert seg.store_range == range(0, P.engine.top_mark)
    assert seg.trail_range == range(0, len(P.engine.trail))
    expected = (sum(cp_bytes(cp) for cp in P.engine.cps)
                + CELL_BYTES * P.engine.top_mark + 16 * len(P.engine.trail))
    assert seg.bytes == expected


def test_common_prefix_is_skipped():
    P, Q = make_team("os", 2)
    push_cp(P, "ab", writes=[(0, 5)])
    push_cp(P, "cd", writes=[(1, 6)])
    share_work(P, Q)
    climb_to(Q, 2)
    push_cp(P, "ef", writes=[(0, 9), (3, 2)])
    seg = compute_copy_segments(P, Q, P.engine.B, True)
    assert seg.cp_range == range(3, 4)
    assert seg.store_range.start == P.engine.cps[2].store_mark
    assert seg.trail_range.start == P.engine.cps[2].trail_mark
    full = compute_copy_segments(P, Q, P.engine.B, False)
    assert seg.bytes < full.bytes


def test_install_replays_writes_below_copied_store():
    P, Q = make_team("os", 2)
    push_cp(P, "ab", writes=[(5, 1)])
    push_cp(P, "cd", writes=[(9, 1)])
    share_work(P, Q)
    climb_to(Q, 2)
    # P rebinds slot 7 (below the common node's store mark) after the fork point
    push_cp(P, "ef", writes=[(7, 42)])
    report = share_work(P, Q)
    assert report.installed == 1
    assert Q.engine.cells[7] == 42


def test_install_is_noop_without_common_writes():
    P, Q = make_team("os", 2)
    push_cp(P, "ab", writes=[(0, 1)])
    push_cp(P, "cd")
    share_work(P, Q)
    climb_to(Q, 2)
    push_cp(P, "ef", writes=[(20, 3)])
    assert share_work(P, Q).installed == 0


def test_relocation_leaves_frames_and_unwinds():
    P, Q = make_team("os", 2)
    for alts in ("ab", "cd", "ef"):
        push_cp(P, alts, writes=[(len(P.engine.cps), 1)])
    share_work(P, Q)
    assert backtrack_only_relocation(Q, 1) == 2
    assert Q.engine.B == 1
    assert not P.engine.cps[3].or_frame.has_member(Q.id)
    assert Q.engine.cells == [0, 1] + [0] * 22
    assert backtrack_only_relocation(Q, 1) == 0


def test_checking_phase_repairs_stale_cursor():
    P, Q, R = make_team("hs", 3)
    push_cp(P, range(8))
    push_cp(P, range(3))
    share_work(P, Q)
    share_work(P, R)
    exhaust_owned(Q)
    climb_to(Q, 1)
    # Q's node 1 still carries the stride from the first split
    assert Q.engine.cps[1].offset == 2 and P.engine.cps[1].offset == 4
    share_work(P, Q)
    owners = [set(w.engine.cps[1].remaining_indices()) for w in (P, Q, R)]
    assert Q.engine.cps[1].offset == P.engine.cps[1].offset == 8
    assert sum(map(len, owners)) == len(set().union(*owners))
    # Q explored {1, 3, 5, 7}; the rest is split three ways
    assert set().union(*owners) == {0, 2, 4, 6}


def test_checking_phase_detects_divergence():
    P, Q = make_team("os", 2)
    push_cp(P, "ab", parent_alt=0)
    push_cp(Q, "ab", parent_alt=1)
    with pytest.raises(RuntimeError):
        checking_phase(P, Q, 1)


@pytest.mark.parametrize("strategy", [s.value for s in Strategy])
def test_dual_path_equivalence(strategy):
    seen = 0
    for seed in range(150):
        a = rendezvous(seed, True, strategy)
        b = rendezvous(seed, False, strategy)
        assert (a is None) == (b is None)
        if a is None:
            continue
        Pa, Qa, ra, x = a
        Pb, Qb, rb, _ = b
        assert resume_snapshot(Qa.engine) == resume_snapshot(Qb.engine)
        assert Qa.owned_set() == Qb.owned_set()
        assert ra.segments.bytes <= rb.segments.bytes
        if x > 0:
            assert ra.segments.bytes < rb.segments.bytes
        seen += 1
    assert seen > 100
