#!/usr/bin/env python3
"""
cchm: concurrent chaining hash map storing every vector uncompressed.

Used as the reference point for memory per state. Each root flag gets its
own table so root and non-root StateIDs live in separate index spaces.
"""

import logging
import threading
from typing import List, Optional, Sequence, Tuple

from state_storage import (
    INDEX_MASK,
    CapacityExhaustedError,
    ConfigurationError,
    InsertResult,
    StateID,
    StateStorage,
    UnknownStateIDError,
    Vector,
    check_vector,
)

logger = logging.getLogger(__name__)

_LOCK_STRIPES = 256

# 8-byte chain link + 8-byte index per entry, 4 bytes per slot
ENTRY_OVERHEAD_BYTES = 16
BUCKET_BYTES = 8
BUCKET_SCALE_MAX = 32


class _ChainTable:
    """Buckets of (vector, index) chains with one lock per bucket stripe."""

    def __init__(self, scale: int):
        self._mask = (1 << scale) - 1
        try:
            self._buckets: List[Optional[List[Tuple[Tuple[int, ...], int]]]] = [None] * (1 << scale)
        except MemoryError:
            raise ConfigurationError(
                f"Cannot allocate {(1 << scale) * BUCKET_BYTES} bytes for 2^{scale} cchm buckets"
            ) from None
        self._locks = [threading.Lock() for _ in range(min(1 << scale, _LOCK_STRIPES))]
        self._entries: List[Tuple[int, ...]] = []
        self._entries_lock = threading.Lock()
        self._slots = 0

    def insert(self, key: Tuple[int, ...]) -> Tuple[int, bool]:
        bucket = hash(key) & self._mask
        with self._locks[bucket % len(self._locks)]:
            chain = self._buckets[bucket]
            if chain is None:
                chain = self._buckets[bucket] = []
            for stored, index in chain:
                if stored == key:
                    return index, False
            with self._entries_lock:
                index = len(self._entries)
                if index > INDEX_MASK:
                    raise CapacityExhaustedError("cchm ran out of 40-bit indices")
                self._entries.append(key)
                self._slots += len(key)
            chain.append((key, index))
            return index, True

    def lookup(self, index: int) -> Tuple[int, ...]:
        if not 0 <= index < len(self._entries):
            raise UnknownStateIDError(f"Index {index} was never assigned")
        return self._entries[index]

    def stats(self) -> dict:
        with self._entries_lock:
            count, slots = len(self._entries), self._slots
        return {
            'occupancy': count,
            'memory_bytes': slots * 4 + count * ENTRY_OVERHEAD_BYTES,
            'buckets': self._mask + 1,
        }


class ConcurrentChainingHashMap(StateStorage):
    name = 'cchm'

    def __init__(self, scale: int = 20):
        if not 1 <= scale <= BUCKET_SCALE_MAX:
            raise ConfigurationError(f"cchm bucket scale {scale} outside 1..{BUCKET_SCALE_MAX}")
        self._tables = {True: _ChainTable(scale), False: _ChainTable(scale)}
        logger.debug("cchm ready with 2^%d buckets per table", scale)

    def insert(self, vector: Sequence[int], root: bool = True) -> InsertResult:
        check_vector(vector)
        key = tuple(vector)
        index, is_new = self._tables[root].insert(key)
        return InsertResult(StateID(index, len(key)), is_new)

    def get(self, sid: StateID, root: bool = True) -> Vector:
        stored = self._tables[root].lookup(sid.index)
        if len(stored) != sid.length:
            raise UnknownStateIDError(f"Index {sid.index} holds length {len(stored)}, not {sid.length}")
        return list(stored)

    def stats(self) -> dict:
        roots = self._tables[True].stats()
        data = self._tables[False].stats()
        memory = roots['memory_bytes'] + data['memory_bytes']
        return {
            'root_occupancy': roots['occupancy'],
            'data_occupancy': data['occupancy'],
            'node_count': roots['occupancy'] + data['occupancy'],
            'memory_bytes': memory,
            'allocated_bytes': memory + (roots['buckets'] + data['buckets']) * BUCKET_BYTES,
        }
