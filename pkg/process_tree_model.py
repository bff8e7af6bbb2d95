#!/usr/bin/env python3
"""
n processes counting from 0 to 9 and wrapping, stored as a tree of states.

Root state:    [n, p0_lo, p0_hi, p1_lo, p1_hi, ...]  (p = embedded StateID)
Process state: [pc, i]                               (stored with root=false)
"""

from typing import List, Tuple

from models import Model, embed, embedded_at
from state_storage import StateID

PROCESS_PC = 0
PROCESS_I = 1
PROCESS_LENGTH = 2
INITIAL_PC = 1


def process_offset(p: int) -> int:
    """Slot offset of p[p] within the root state."""
    return 1 + 2 * p


class ProcessTreeModel(Model):
    """Steps with a full root get, a delta on the process and a delta on the root."""

    name = 'process_tree'
    PARAMETERS = {
        'n': (4, 1),
        'modulus': (10, 1),
    }

    def initial_state(self, ctx) -> None:
        init_p = ctx.insert([INITIAL_PC, 0], False).id
        ctx.insert([self.n] + embed(init_p) * self.n, True)

    def next_states(self, ctx, sid: StateID) -> None:
        sv = ctx.get(sid, True)
        for p in range(self.n):
            o1 = process_offset(p)
            proc = embedded_at(sv, o1)
            pi = ctx.get_partial(proc, PROCESS_I, 1, False)[0]
            stepped = ctx.delta(proc, PROCESS_I, [(pi + 1) % self.modulus], False)
            ctx.delta(sid, o1, embed(stepped.id), True)

    def canonical_state(self, storage, sid: StateID) -> Tuple[int, ...]:
        sv = storage.get(sid, True)
        flat: List[int] = [sv[0]]
        for p in range(sv[0]):
            flat.extend(storage.get(embedded_at(sv, process_offset(p)), False))
        return tuple(flat)


class ProcessTreeRecursiveModel(ProcessTreeModel):
    """Same state space, stepped with one recursive get and one recursive sparse delta."""

    name = 'process_tree_recursive'

    def next_states(self, ctx, sid: StateID) -> None:
        for p in range(self.n):
            o1 = process_offset(p)
            pi = ctx.get_recursive(sid, [o1, PROCESS_I], 1)[0]
            ctx.delta_recursive_sparse(sid, [o1], [(PROCESS_I, [(pi + 1) % self.modulus])])
