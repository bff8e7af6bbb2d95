#!/usr/bin/env python3
"""
Four counters counting modulo 10: every state has one successor per counter.
"""

from models import Model
from state_storage import StateID


class CountersModel(Model):
    name = 'counters'
    PARAMETERS = {
        'counters': (4, 1),
        'modulus': (10, 1),
    }

    def initial_state(self, ctx) -> None:
        ctx.insert([0] * self.counters, True)

    def next_states(self, ctx, sid: StateID) -> None:
        for i in range(self.counters):
            v = ctx.get_partial(sid, i, 1, True)[0]
            ctx.delta(sid, i, [(v + 1) % self.modulus], True)
