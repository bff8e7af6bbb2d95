#!/usr/bin/env python3
"""
Dynamic allocation model: P processes append to a shared, growing heap.

Root state: [P, heap_lo, heap_hi]
Heap state: [count, a_1, ..., a_count]  (a_k = process that made the k-th append)

Every process may append at most K times, so the heap grows from 1 to
P*K + 1 slots and the run stores states of many different lengths.
"""

from typing import Tuple

from models import Model, embed, embedded_at
from state_storage import StateID

HEAP_OFFSET = 1


class DynAllocModel(Model):
    name = 'dyn_alloc'
    PARAMETERS = {
        'P': (2, 1),
        'K': (2, 0),
    }

    def initial_state(self, ctx) -> None:
        heap = ctx.insert([0], False).id
        ctx.insert([self.P] + embed(heap), True)

    def next_states(self, ctx, sid: StateID) -> None:
        heap_id = embedded_at(ctx.get_partial(sid, HEAP_OFFSET, 2, True), 0)
        heap = ctx.get(heap_id, False)
        count = heap[0]
        for p in range(1, self.P + 1):
            if heap[1:].count(p) >= self.K:
                continue
            grown = ctx.delta_sparse(heap_id, [(0, [count + 1]), (len(heap), [p])], False)
            ctx.delta(sid, HEAP_OFFSET, embed(grown.id), True)

    def canonical_state(self, storage, sid: StateID) -> Tuple[int, ...]:
        root = storage.get(sid, True)
        return (root[0],) + tuple(storage.get(embedded_at(root, HEAP_OFFSET), False))
