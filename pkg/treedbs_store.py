#!/usr/bin/env python3
"""
Fixed-length compression tree in the array layout of TreeDBS, plus the
hybrid store that routes one vector length to it and the rest to cchm.

Vectors are padded with zero slots to the configured length L. Node n has
children 2n and 2n+1; positions L..2L-1 are the slots themselves, node 1 is
the top node. The all-ones node value is reserved as the empty marker
so states producing it are rejected.
"""

import logging
from typing import Dict, List, Sequence

from cchm_store import ConcurrentChainingHashMap
from indexed_hash_set import DATA_SCALE_MAX, DEFAULT_SEED, IndexedHashSet, SetConfig
from state_storage import (
    SLOT_BITS,
    SLOT_MASK,
    ConfigurationError,
    InsertResult,
    ReservedValueError,
    SparseDeltaList,
    StateID,
    StateStorage,
    UnknownStateIDError,
    Vector,
    VectorTooLongError,
    check_vector,
    normalize_deltas,
    overlay,
    resulting_length,
)

logger = logging.getLogger(__name__)

EMPTY_MARKER = (1 << 64) - 1


class PaddedTreeDBS(StateStorage):
    name = 'treedbs_pad'

    def __init__(self, pad_length: int, root_scale: int = 20, data_scale: int = 20,
                 seed: int = DEFAULT_SEED):
        if pad_length < 2:
            raise ConfigurationError(f"Pad length must be at least 2, got {pad_length}")
        if data_scale > DATA_SCALE_MAX:
            raise ConfigurationError(f"Data set scale {data_scale} exceeds {DATA_SCALE_MAX}")
        self.pad_length = pad_length
        self._roots = IndexedHashSet(SetConfig(root_scale, seed))
        self._data = IndexedHashSet(SetConfig(data_scale, seed))

    def insert(self, vector: Sequence[int], root: bool = True) -> InsertResult:
        check_vector(vector)
        size = self.pad_length
        if len(vector) > size:
            raise VectorTooLongError(f"Vector of length {len(vector)} exceeds pad length {size}")
        padded = list(vector) + [0] * (size - len(vector))

        # leaf pairs first, so a rejected state leaves no nodes behind
        for n in range(size // 2, size):
            if 2 * n >= size and padded[2 * n - size] == SLOT_MASK and padded[2 * n + 1 - size] == SLOT_MASK:
                raise ReservedValueError(
                    f"Slots {2 * n - size} and {2 * n + 1 - size} pair into the reserved empty value"
                )

        halves: Dict[int, int] = {}

        def half(position: int) -> int:
            return padded[position - size] if position >= size else halves[position]

        for n in range(size - 1, 0, -1):
            word = (half(2 * n) << SLOT_BITS) | half(2 * n + 1)
            if word == EMPTY_MARKER:
                raise ReservedValueError(f"Node {n} equals the reserved empty value")
            if n == 1:
                if root:
                    index, is_new = self._roots.insert_if_absent(word, len(vector))
                else:
                    index, is_new = self._data.insert_if_absent(word, 0)
                return InsertResult(StateID(index, len(vector)), is_new)
            halves[n] = self._data.insert_if_absent(word, 0)[0]
        raise AssertionError("unreachable: pad length >= 2 always has a top node")

    def get(self, sid: StateID, root: bool = True) -> Vector:
        size = self.pad_length
        if root:
            word, tag = self._roots.read(sid.index)
            if tag != sid.length:
                raise UnknownStateIDError(f"Root index {sid.index} holds length {tag}, not {sid.length}")
        else:
            word = self._data.read(sid.index)[0]
        if sid.length > size:
            raise UnknownStateIDError(f"StateID length {sid.length} exceeds pad length {size}")

        out = [0] * size
        stack = [(1, word)]
        while stack:
            n, word = stack.pop()
            for position, value in ((2 * n, word >> SLOT_BITS), (2 * n + 1, word & SLOT_MASK)):
                if position >= size:
                    out[position - size] = value
                else:
                    stack.append((position, self._data.read(value)[0]))
        return out[:sid.length]

    def stats(self) -> dict:
        roots = self._roots.stats()
        data = self._data.stats()
        return {
            'root_occupancy': roots['occupancy'],
            'data_occupancy': data['occupancy'],
            'node_count': roots['occupancy'] + data['occupancy'],
            'memory_bytes': roots['memory_bytes'] + data['memory_bytes'],
            'allocated_bytes': roots['allocated_bytes'] + data['allocated_bytes'],
        }


class TreeDBSHybridStore(StateStorage):
    """Vectors of exactly the routing length go to treedbs_pad, all others to cchm."""

    name = 'treedbs_x_cchm'

    def __init__(self, route_length: int, root_scale: int = 20, data_scale: int = 20,
                 sub_scale: int = 16, seed: int = DEFAULT_SEED):
        self.route_length = route_length
        self._tree = PaddedTreeDBS(route_length, root_scale, data_scale, seed)
        self._chained = ConcurrentChainingHashMap(sub_scale)

    def _store_for(self, length: int) -> StateStorage:
        return self._tree if length == self.route_length else self._chained

    def insert(self, vector: Sequence[int], root: bool = True) -> InsertResult:
        check_vector(vector)
        return self._store_for(len(vector)).insert(vector, root)

    def get(self, sid: StateID, root: bool = True) -> Vector:
        return self._store_for(sid.length).get(sid, root)

    def delta_sparse(self, sid: StateID, deltas: SparseDeltaList, root: bool = True) -> InsertResult:
        entries = normalize_deltas(deltas)
        if resulting_length(sid.length, entries) == sid.length:
            return self._store_for(sid.length).delta_sparse(sid, entries, root)
        return self.insert(overlay(self.get(sid, root), entries), root)

    def stats(self) -> dict:
        parts: List[dict] = [self._tree.stats(), self._chained.stats()]
        return {key: sum(part[key] for part in parts)
                for key in ('root_occupancy', 'data_occupancy', 'node_count',
                            'memory_bytes', 'allocated_bytes')}
