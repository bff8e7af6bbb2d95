#!/usr/bin/env python3
"""
Parallel BFS reachability core.

A model inserts its initial state through a SearchContext; every new root
state is pushed to a shared work queue. Worker threads pop StateIDs and ask
the model for next states until the queue is empty and no worker is busy.
"""

import logging
import threading
import time
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional, Sequence, Tuple

from apscheduler.schedulers.background import BackgroundScheduler

from state_storage import (
    InsertResult,
    OffsetPath,
    SparseDeltaList,
    StateID,
    StateStorage,
    Vector,
)

logger = logging.getLogger(__name__)


class WorkQueue:
    """
    FIFO of StateIDs with quiescence detection.

    pop() marks the caller active; done() marks it idle again. The queue is
    closed when it is empty while no worker is active; both conditions are
    checked under the same lock, so no wakeup is missed.
    """

    def __init__(self):
        self._items: Deque[StateID] = deque()
        self._cond = threading.Condition()
        self._active = 0
        self._closed = False

    def push(self, sid: StateID) -> None:
        with self._cond:
            self._items.append(sid)
            self._cond.notify()

    def pop(self) -> Optional[StateID]:
        with self._cond:
            while True:
                if self._closed:
                    return None
                if self._items:
                    self._active += 1
                    return self._items.popleft()
                if self._active == 0:
                    self._closed = True
                    self._cond.notify_all()
                    return None
                self._cond.wait()

    def done(self) -> None:
        with self._cond:
            self._active -= 1
            if self._active == 0 and not self._items:
                self._cond.notify_all()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def __len__(self) -> int:
        with self._cond:
            return len(self._items)


@dataclass
class SearchStats:
    visited_roots: int = 0
    transitions: int = 0
    operations: int = 0
    inserts: int = 0
    wall_time: float = 0.0
    storage: Dict[str, int] = field(default_factory=dict)
    # (length, root) -> [insert/delta results, of which new]
    histogram: Dict[Tuple[int, bool], List[int]] = field(default_factory=dict)
    visited_ids: List[StateID] = field(default_factory=list)


class SearchAborted(Exception):
    def __init__(self, stats: SearchStats, cause: BaseException):
        super().__init__(f"Search aborted after {stats.visited_roots} states: {cause}")
        self.stats = stats
        self.cause = cause


class SearchContext:
    """Storage wrapper handed to models: new root states are queued automatically."""

    def __init__(self, storage: StateStorage, queue: WorkQueue, record_visited: bool = False):
        self.storage = storage
        self._queue = queue
        self._record_visited = record_visited
        self._lock = threading.Lock()
        self._expanding = False
        self._visited = 0
        self._transitions = 0
        self._operations = 0
        self._inserts = 0
        self._histogram: Counter = Counter()
        self._new_histogram: Counter = Counter()
        self._visited_ids: List[StateID] = []

    def begin_expansion(self) -> None:
        """Root results from here on count as transitions."""
        self._expanding = True

    def _count(self) -> None:
        with self._lock:
            self._operations += 1

    def _record(self, result: InsertResult, root: bool) -> InsertResult:
        enqueue = result.is_new and root
        key = (result.id.length, root)
        with self._lock:
            self._operations += 1
            self._inserts += 1
            self._histogram[key] += 1
            if result.is_new:
                self._new_histogram[key] += 1
            if root and self._expanding:
                self._transitions += 1
            if enqueue:
                self._visited += 1
                if self._record_visited:
                    self._visited_ids.append(result.id)
        if enqueue:
            self._queue.push(result.id)
        return result

    # ---------- updates ----------

    def insert(self, vector: Sequence[int], root: bool = True) -> InsertResult:
        return self._record(self.storage.insert(vector, root), root)

    def delta(self, sid: StateID, offset: int, data: Sequence[int], root: bool = True) -> InsertResult:
        return self._record(self.storage.delta(sid, offset, data, root), root)

    def delta_sparse(self, sid: StateID, deltas: SparseDeltaList, root: bool = True) -> InsertResult:
        return self._record(self.storage.delta_sparse(sid, deltas, root), root)

    def delta_recursive_sparse(self, sid: StateID, path: OffsetPath, deltas: SparseDeltaList) -> InsertResult:
        """One operation, one histogram row: the outer root result. Rebuilt sub-states show up in node counts only."""
        return self._record(self.storage.delta_recursive_sparse(sid, path, deltas), True)

    # ---------- reads are passed on ----------

    def get(self, sid: StateID, root: bool = True) -> Vector:
        self._count()
        return self.storage.get(sid, root)

    def get_partial(self, sid: StateID, offset: int, length: int, root: bool = True) -> Vector:
        self._count()
        return self.storage.get_partial(sid, offset, length, root)

    def get_recursive(self, sid: StateID, path: OffsetPath, length: int) -> Vector:
        self._count()
        return self.storage.get_recursive(sid, path, length)

    # ---------- reporting ----------

    @property
    def visited_roots(self) -> int:
        return self._visited

    @property
    def transitions(self) -> int:
        return self._transitions

    def snapshot(self, wall_time: float) -> SearchStats:
        with self._lock:
            histogram = {key: [count, self._new_histogram[key]]
                         for key, count in sorted(self._histogram.items())}
            return SearchStats(
                visited_roots=self._visited,
                transitions=self._transitions,
                operations=self._operations,
                inserts=self._inserts,
                wall_time=wall_time,
                storage=self.storage.stats(),
                histogram=histogram,
                visited_ids=list(self._visited_ids),
            )


def _storage_is_empty(storage: StateStorage) -> bool:
    return storage.stats().get('root_occupancy', 0) == 0


def run(model, storage: StateStorage, threads: int = 1, progress_interval: float = 0,
        record_visited: bool = False) -> SearchStats:
    """Explore every root state reachable from model.initial_state."""
    if threads < 1:
        raise ValueError(f"Need at least one worker thread, got {threads}")
    if not _storage_is_empty(storage):
        raise ValueError("Search needs an empty storage")

    queue = WorkQueue()
    ctx = SearchContext(storage, queue, record_visited)
    failures: List[BaseException] = []
    failure_lock = threading.Lock()
    start = time.perf_counter()

    def fail(exc: BaseException) -> None:
        with failure_lock:
            if not failures:
                failures.append(exc)
        queue.close()

    def worker() -> None:
        while True:
            sid = queue.pop()
            if sid is None:
                return
            try:
                model.next_states(ctx, sid)
            except Exception as e:
                fail(e)
            finally:
                queue.done()

    def report_progress() -> None:
        logger.info("%d states visited, %d transitions, %d queued",
                    ctx.visited_roots, ctx.transitions, len(queue))

    scheduler = None
    if progress_interval > 0:
        scheduler = BackgroundScheduler()
        scheduler.add_job(func=report_progress, trigger="interval", seconds=progress_interval)
        scheduler.start()

    try:
        try:
            model.initial_state(ctx)
        except Exception as e:
            fail(e)
        ctx.begin_expansion()

        if not failures:
            workers = [threading.Thread(target=worker, name=f"search-worker-{i}", daemon=True)
                       for i in range(threads)]
            for t in workers:
                t.start()
            for t in workers:
                t.join()
    finally:
        if scheduler is not None:
            scheduler.shutdown(wait=False)

    stats = ctx.snapshot(time.perf_counter() - start)
    if failures:
        logger.warning("Search aborted: %s", failures[0])
        raise SearchAborted(stats, failures[0]) from failures[0]
    logger.debug("Search finished: %d states, %d transitions in %.3fs",
                 stats.visited_roots, stats.transitions, stats.wall_time)
    return stats
