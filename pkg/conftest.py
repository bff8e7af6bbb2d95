"""Shared fixtures: small stores and a plain-map reference store."""

from typing import Dict, List, Sequence, Tuple

import pytest

from cchm_store import ConcurrentChainingHashMap
from dtree import DTree
from state_storage import (
    InsertResult,
    StateID,
    StateStorage,
    UnknownStateIDError,
    Vector,
    check_vector,
)
from treedbs_store import PaddedTreeDBS


class ReferenceStore(StateStorage):
    """Vectors kept whole in dictionaries; the oracle for differential tests."""

    name = 'reference'

    def __init__(self):
        self._ids: Dict[Tuple[Tuple[int, ...], bool], StateID] = {}
        self._vectors: Dict[bool, List[Tuple[int, ...]]] = {True: [], False: []}

    def insert(self, vector: Sequence[int], root: bool = True) -> InsertResult:
        check_vector(vector)
        key = (tuple(vector), root)
        if key in self._ids:
            return InsertResult(self._ids[key], False)
        table = self._vectors[root]
        sid = StateID(len(table), len(vector))
        table.append(tuple(vector))
        self._ids[key] = sid
        return InsertResult(sid, True)

    def get(self, sid: StateID, root: bool = True) -> Vector:
        table = self._vectors[root]
        if not 0 <= sid.index < len(table):
            raise UnknownStateIDError(str(sid))
        return list(table[sid.index])

    def stats(self) -> dict:
        roots, data = len(self._vectors[True]), len(self._vectors[False])
        return {'root_occupancy': roots, 'data_occupancy': data, 'node_count': roots + data,
                'memory_bytes': 0, 'allocated_bytes': 0}


@pytest.fixture
def reference():
    return ReferenceStore()


@pytest.fixture
def dtree():
    return DTree(root_scale=16, data_scale=16)


@pytest.fixture
def cchm():
    return ConcurrentChainingHashMap(scale=12)


@pytest.fixture
def make_store():
    """Factory for every storage under test at a desk-scale size."""
    def _make(name: str, pad_length: int = 16):
        if name == 'dtree':
            return DTree(root_scale=18, data_scale=18)
        if name == 'cchm':
            return ConcurrentChainingHashMap(scale=14)
        if name == 'treedbs_pad':
            return PaddedTreeDBS(pad_length, root_scale=18, data_scale=18)
        raise ValueError(name)
    return _make
