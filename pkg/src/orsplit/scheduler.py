"""Multi-worker runtime: engine loops, work requests, repositioning, termination."""

from __future__ import annotations

import enum
import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

from .engine import (EXHAUSTED, ROOT_ALT, ROOT_NODE, SOLUTION,
                     EngineState, SearchProgram, take_next_owned_alternative)
from .orframes import (Mode, Strategy, WorkerState, leave_node, make_root_frame,
                       shared_take_alternative)
from .sharing import SharingDenied, check_request, share_work

log = logging.getLogger(__name__)


class Reposition(enum.Enum):
    NEAREST_BUSY = "nearest_busy"
    ALL_BUSY_BELOW = "all_busy_below"


@dataclass
class SchedulerConfig:
    workers: int = 1
    threshold: int = 1
    strategy: Strategy = Strategy.OS
    incremental: bool = True
    reposition_policy: Reposition = Reposition.NEAREST_BUSY
    verify: bool = False

    def __post_init__(self):
        self.strategy = Strategy.parse(self.strategy)
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")


class Reply(enum.Enum):
    GRANTED = "granted"
    DENIED = "denied"


class SharingRequest:
    __slots__ = ("sender", "reply", "done")

    def __init__(self, sender: WorkerState):
        self.sender = sender
        self.reply: Optional[Reply] = None
        self.done = threading.Event()

    def answer(self, reply: Reply) -> None:
        self.reply = reply
        self.done.set()


class Mailbox:
    """Single-slot request box; ``slot`` is polled without the lock."""

    __slots__ = ("slot", "_lock")

    def __init__(self):
        self.slot = None
        self._lock = threading.Lock()

    def offer(self, req) -> bool:
        with self._lock:
            if self.slot is not None:
                return False
            self.slot = req
            return True

    def take(self):
        with self._lock:
            req, self.slot = self.slot, None
            return req


class _Abort(Exception):
    pass


_ABORT = object()


@dataclass
class RunResult:
    solutions: list
    leaves: list
    per_worker_leaves: list
    seconds: float
    sharings: int
    bytes_copied: int
    frames_allocated: int
    outcomes: list = field(default_factory=list)
    events: list = field(default_factory=list)
    terminated: bool = True
    verify_failures: list = field(default_factory=list)


def update_load(worker: WorkerState) -> int:
    """Recount and publish the worker's owned unexplored alternatives."""
    worker.load = worker.recount_load()
    return worker.load


class Runtime:
    """A team of workers exploring one program's search tree."""

    def __init__(self, program: SearchProgram, config: SchedulerConfig):
        self.program = program
        self.config = config
        self.strategy = config.strategy
        n = config.workers
        self.workers = [WorkerState(i, EngineState(program), config.strategy)
                        for i in range(n)]
        root_cp = self.workers[0].engine.push_root()
        for w in self.workers[1:]:
            w.engine.push_root()
        self.root_frame = make_root_frame(root_cp, n)
        for w in self.workers:
            cp = w.engine.cps[0]
            cp.or_frame = self.root_frame
            cp.cursor = EXHAUSTED
            w.top_or_frame = self.root_frame
        first = self.workers[0]
        first.mode = Mode.ENGINE
        first.engine.current = (ROOT_NODE, ROOT_ALT)
        self.mailboxes = [Mailbox() for _ in range(n)]
        self.generation = 0
        self.terminated = False
        self.aborted = False
        self.outcomes: list = []
        self.events: list = []
        self.errors: list = []
        self.verify_failures: list = []
        self._t0 = 0
        self.run_index = 0
        self._lock = threading.Lock()

    # -- engine mode -------------------------------------------------------
    def backtrack(self, w: WorkerState) -> bool:
        """Move to the next alternative this worker may take.

        Returns True after applying one, False when the worker runs out of
        work and must schedule (positioned at its youngest choice point).
        """
        eng = w.engine
        cps = eng.cps
        apply = self.program.apply
        strategy = self.strategy
        while True:
            cp = cps[-1]
            eng.unwind(cp.trail_mark, cp.store_mark)
            fr = cp.or_frame
            if fr is None:
                i = take_next_owned_alternative(cp)
                if i == EXHAUSTED:
                    cps.pop()
                    continue
                w.load -= 1
            else:
                if strategy is Strategy.OS:
                    i = shared_take_alternative(fr, w.id)
                elif strategy.strided or fr is w.chain_head:
                    i = take_next_owned_alternative(cp)
                    if i != EXHAUSTED:
                        w.load -= 1
                else:
                    i = EXHAUSTED
                if i == EXHAUSTED:
                    if len(cps) == 1 or w.load == 0:
                        return False
                    self._pop_shared(w)
                    continue
            eng.current = (cp.node_id, i)
            if apply(eng, cp.alts[i]):
                return True
            eng.record_leaf(False)

    def _pop_shared(self, w: WorkerState) -> None:
        cp = w.engine.cps.pop()
        fr = cp.or_frame
        if fr is w.chain_head:
            w.chain_head = fr.nearest_livenode
        leave_node(w, fr)

    def run_engine(self, w: WorkerState, resume: bool) -> None:
        w.mode = Mode.ENGINE
        eng = w.engine
        expand = self.program.expand
        box = self.mailboxes[w.id]
        if resume and not self.backtrack(w):
            w.mode = Mode.SCHEDULING
            return
        while True:
            if box.slot is not None:
                self.serve(w)
            out = expand(eng.cells)
            if out is SOLUTION:
                eng.record_leaf(True)
            elif out:
                eng.push_choice_point(out)
                w.load += len(out)
            else:
                eng.record_leaf(False)
            if not self.backtrack(w):
                w.mode = Mode.SCHEDULING
                return

    def serve(self, w: WorkerState) -> None:
        req = self.mailboxes[w.id].take()
        if req is None:
            return
        if req is _ABORT:
            raise _Abort()
        q = req.sender
        if w.mode is not Mode.ENGINE or check_request(w, q, self.config.threshold):
            req.answer(Reply.DENIED)
            return
        try:
            report = share_work(w, q, self.config.incremental,
                                self.config.threshold, self.config.verify)
        except SharingDenied:
            req.answer(Reply.DENIED)
            return
        self.generation += 1
        if self.config.verify:
            self._verify(w, q, report)
        self.events.append({
            "run": self.run_index,
            "time_ns": time.perf_counter_ns() - self._t0,
            "from": w.id,
            "to": q.id,
            "strategy": self.strategy.value,
            "alts_to_p": w.load,
            "alts_to_q": q.load,
            "bytes_copied": report.segments.bytes,
        })
        req.answer(Reply.GRANTED)

    def _verify(self, p, q, report) -> None:
        self.outcomes.append(report.outcome)
        problems = []
        if not report.outcome.complementary:
            problems.append("split not complementary")
        for w in (p, q):
            if w.load != w.recount_load():
                problems.append(f"worker {w.id} load register drifted")
            for fr in w.branch_frames():
                if not fr.has_member(w.id):
                    problems.append(f"worker {w.id} missing from {fr!r}")
        if problems:
            self.verify_failures.append((p.id, q.id, problems))

    # -- scheduling mode ---------------------------------------------------
    def find_busy_worker(self, w: WorkerState) -> Optional[WorkerState]:
        """A worker with load over threshold, preferring those below ``w``'s node."""
        frame = w.engine.cps[-1].or_frame
        mask = frame.member_mask
        thr = self.config.threshold
        below = above = None
        for other in self.workers:
            if other is w or other.load <= thr:
                continue
            if mask >> other.id & 1:
                if below is None or other.load > below.load:
                    below = other
            elif above is None or other.load > above.load:
                above = other
        return below if below is not None else above

    def request_accept_cycle(self, w: WorkerState, target: WorkerState) -> Reply:
        req = SharingRequest(w)
        if not self.mailboxes[target.id].offer(req):
            return Reply.DENIED
        box = self.mailboxes[w.id]
        while not req.done.wait(0.0005):
            if box.slot is not None:
                self._deny_pending(w)
            if self.terminated or self.aborted:
                # the target may still answer; wait for the rendezvous to settle
                if req.done.wait(0.05):
                    break
                return Reply.DENIED
        return req.reply

    def _deny_pending(self, w: WorkerState) -> None:
        req = self.mailboxes[w.id].take()
        if req is _ABORT:
            raise _Abort()
        if req is not None:
            req.answer(Reply.DENIED)

    def reposition_wanted(self, w: WorkerState) -> bool:
        cps = w.engine.cps
        if len(cps) == 1:
            return False
        mask = cps[-1].or_frame.member_mask
        busy = [o for o in self.workers if o is not w and o.mode is Mode.ENGINE]
        if not busy:
            return True
        if self.config.reposition_policy is Reposition.NEAREST_BUSY:
            return not any(mask >> o.id & 1 for o in busy)
        return not all(mask >> o.id & 1 for o in busy)

    def public_work_above(self, w: WorkerState) -> bool:
        if self.strategy is not Strategy.OS:
            return False
        for cp in w.engine.cps[:-1]:
            fr = cp.or_frame
            if fr is not None and fr.shared_cursor != EXHAUSTED:
                return True
        return False

    def move_up(self, w: WorkerState) -> bool:
        """Leave the current node and backtrack; True if work was found."""
        if len(w.engine.cps) == 1:
            return False
        self._pop_shared(w)
        if self.backtrack(w):
            return True
        return False

    def detect_termination(self) -> bool:
        if self.terminated:
            return True
        g = self.generation
        for o in self.workers:
            if o.mode is not Mode.SCHEDULING or len(o.engine.cps) != 1 or o.load:
                return False
        if g != self.generation:
            return False
        self.terminated = True
        return True

    def schedule(self, w: WorkerState) -> Optional[bool]:
        """Find new work for an idle worker.

        Returns True when work was granted by a sharer (the engine must
        backtrack into it), False when moving up already applied an
        alternative, and None once the run has terminated.
        """
        w.mode = Mode.SCHEDULING
        naps = 0
        while True:
            if self.aborted:
                raise _Abort()
            if self.terminated:
                return None
            self._deny_pending(w)
            target = self.find_busy_worker(w)
            if target is not None:
                at = w.engine.cps[-1].or_frame
                if at.has_member(target.id):
                    if self.request_accept_cycle(w, target) is Reply.GRANTED:
                        return True
                else:
                    if self.move_up(w):
                        return False
                    continue
            elif self.public_work_above(w) or self.reposition_wanted(w):
                if self.move_up(w):
                    return False
                continue
            elif len(w.engine.cps) == 1 and self.detect_termination():
                return None
            naps += 1
            time.sleep(min(0.002, 0.0001 * naps))

    def worker_main(self, w: WorkerState) -> None:
        try:
            if w.mode is Mode.ENGINE:
                self.run_engine(w, resume=False)
            while (resume := self.schedule(w)) is not None:
                self.run_engine(w, resume)
        except _Abort:
            pass
        except BaseException as exc:  # surfaced by run()
            log.exception("worker %d failed", w.id)
            self.errors.append(exc)
            self.abort()

    def abort(self) -> None:
        self.aborted = True
        for box in self.mailboxes:
            with box._lock:
                if box.slot is not None and box.slot is not _ABORT:
                    box.slot.answer(Reply.DENIED)
                box.slot = _ABORT

    def run(self, timeout: Optional[float] = None, run_index: int = 0) -> RunResult:
        self.run_index = run_index
        self._t0 = time.perf_counter_ns()
        t0 = time.perf_counter()
        if len(self.workers) == 1:
            self.worker_main(self.workers[0])
        else:
            threads = [threading.Thread(target=self.worker_main, args=(w,),
                                        name=f"worker-{w.id}", daemon=True)
                       for w in self.workers]
            for t in threads:
                t.start()
            deadline = None if timeout is None else t0 + timeout
            for t in threads:
                t.join(None if deadline is None else max(0.0, deadline - time.perf_counter()))
            if any(t.is_alive() for t in threads):
                self.abort()
                for t in threads:
                    t.join(5.0)
        seconds = time.perf_counter() - t0
        if self.errors:
            raise self.errors[0]
        per_worker = [w.engine.leaves for w in self.workers]
        return RunResult(
            solutions=[s for w in self.workers for s in w.engine.solutions],
            leaves=[leaf for lv in per_worker for leaf in lv],
            per_worker_leaves=per_worker,
            seconds=seconds,
            sharings=sum(w.sharings for w in self.workers),
            bytes_copied=sum(w.bytes_copied for w in self.workers),
            frames_allocated=sum(w.frames_allocated for w in self.workers),
            outcomes=self.outcomes,
            events=self.events,
            terminated=self.terminated or len(self.workers) == 1,
            verify_failures=self.verify_failures,
        )


def run_parallel(program: SearchProgram, config: SchedulerConfig,
                 timeout: Optional[float] = None) -> RunResult:
    return Runtime(program, config).run(timeout)


def worker_loop(runtime: Runtime, w: WorkerState) -> None:
    runtime.worker_main(w)
