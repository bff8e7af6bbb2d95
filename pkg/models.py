#!/usr/bin/env python3
"""
Model interface for the search core, plus helpers for trees of states.

A model never touches the storage directly while exploring: it reads and
produces states only through the SearchContext it is handed.
"""

from typing import Dict, List, Sequence, Tuple

from state_storage import ConfigurationError, StateID


class Model:
    """Base class of explorable models."""

    name = 'model'
    # parameter name -> (default, minimum)
    PARAMETERS: Dict[str, Tuple[int, int]] = {}

    def __init__(self, **params: int):
        unknown = set(params) - set(self.PARAMETERS)
        if unknown:
            raise ConfigurationError(f"Unknown parameter(s) for {self.name}: {', '.join(sorted(unknown))}")
        for key, (default, minimum) in self.PARAMETERS.items():
            value = int(params.get(key, default))
            if value < minimum:
                raise ConfigurationError(f"{self.name}: {key} must be at least {minimum}, got {value}")
            setattr(self, key, value)

    def initial_state(self, ctx) -> None:
        raise NotImplementedError

    def next_states(self, ctx, sid: StateID) -> None:
        raise NotImplementedError

    def canonical_state(self, storage, sid: StateID) -> Tuple[int, ...]:
        """Run-independent rendering of a root state (embedded StateIDs expanded)."""
        return tuple(storage.get(sid, True))

    def params(self) -> Dict[str, int]:
        return {key: getattr(self, key) for key in self.PARAMETERS}


def embed(sid: StateID) -> List[int]:
    return sid.to_slots()


def embedded_at(vector: Sequence[int], offset: int) -> StateID:
    return StateID.from_slots(vector[offset], vector[offset + 1])
