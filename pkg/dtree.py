#!/usr/bin/env python3
"""
dtree: compressing storage for variable-length state vectors.

A vector V is stored as a chain of perfectly balanced binary trees: the left
child of the node leading to V covers lpst(len(V)) slots, the right child the
remainder. A node is one 64-bit word holding two 32-bit halves; a half is
either the data-set index of a child node or, for a 1-slot segment, the slot
itself. Top nodes of root states live in the root set tagged with the vector
length; every other node lives in the data set.
"""

import logging
from typing import List, NamedTuple, Optional, Sequence, Tuple

from indexed_hash_set import DATA_SCALE_MAX, DEFAULT_SEED, IndexedHashSet, SetConfig
from state_storage import (
    SLOT_BITS,
    SLOT_MASK,
    ConfigurationError,
    InsertResult,
    OffsetPath,
    OutOfBoundsError,
    SparseDeltaList,
    StateID,
    StateStorage,
    UnknownStateIDError,
    Vector,
    check_range,
    check_vector,
    normalize_deltas,
    resulting_length,
)

logger = logging.getLogger(__name__)

Entries = List[Tuple[int, List[int]]]


def lpst(x: int) -> int:
    """Largest power of two strictly smaller than x (x >= 2)."""
    return 1 << ((x - 1).bit_length() - 1)


def _pack(left: int, right: int) -> int:
    return (left << SLOT_BITS) | right


class _Span(NamedTuple):
    """A subtree of an existing state: slots [offset, offset + length)."""
    offset: int
    length: int
    half: Optional[int]   # data index, or the slot itself when length == 1
    word: Optional[int]   # node word, loaded on demand


def _split(entries: Entries, mid: int) -> Tuple[Entries, Entries]:
    """Partition sorted entries at mid; an entry straddling mid is cut in two."""
    left, right = [], []
    for offset, data in entries:
        end = offset + len(data)
        if end <= mid:
            left.append((offset, data))
        elif offset >= mid:
            right.append((offset, data))
        else:
            left.append((offset, data[:mid - offset]))
            right.append((mid, data[mid - offset:]))
    return left, right


class DTree(StateStorage):
    name = 'dtree'

    def __init__(self, root_scale: int = 20, data_scale: int = 20, seed: int = DEFAULT_SEED):
        if data_scale > DATA_SCALE_MAX:
            raise ConfigurationError(
                f"Data set scale {data_scale} exceeds {DATA_SCALE_MAX}: data indices must pair into 64 bits"
            )
        self._roots = IndexedHashSet(SetConfig(root_scale, seed))
        self._data = IndexedHashSet(SetConfig(data_scale, seed))
        logger.debug("dtree ready (root scale %d, data scale %d)", root_scale, data_scale)

    # ---------- node plumbing ----------

    def _store(self, word: int) -> int:
        return self._data.insert_if_absent(word, 0)[0]

    def _node_word(self, half: int) -> int:
        return self._data.read(half)[0]

    def _publish(self, word: int, length: int, root: bool) -> InsertResult:
        if root:
            index, is_new = self._roots.insert_if_absent(word, length)
        else:
            index, is_new = self._data.insert_if_absent(word, 0)
        return InsertResult(StateID(index, length), is_new)

    def _top_word(self, sid: StateID, root: bool) -> int:
        if sid.length < 1:
            raise UnknownStateIDError(f"StateID {sid} has length 0")
        if root:
            word, tag = self._roots.read(sid.index)
            if tag != sid.length:
                raise UnknownStateIDError(
                    f"Root index {sid.index} holds a state of length {tag}, not {sid.length}"
                )
            return word
        return self._data.read(sid.index)[0]

    # ---------- construction ----------

    def _build(self, vector: Sequence[int], offset: int, length: int) -> int:
        if length == 1:
            return vector[offset]
        return self._store(self._build_word(vector, offset, length))

    def _build_word(self, vector: Sequence[int], offset: int, length: int) -> int:
        left = lpst(length)
        return _pack(self._build(vector, offset, left),
                     self._build(vector, offset + left, length - left))

    def insert(self, vector: Sequence[int], root: bool = True) -> InsertResult:
        check_vector(vector)
        length = len(vector)
        if length == 1:
            word = _pack(vector[0], 0)
        else:
            word = self._build_word(vector, 0, length)
        return self._publish(word, length, root)

    # ---------- reconstruction ----------

    def _read(self, word: int, length: int, lo: int, hi: int, out: List[int]) -> None:
        """Append slots [lo, hi) of the node word leading to `length` slots."""
        if length == 1:
            out.append(word >> SLOT_BITS)
            return
        left = lpst(length)
        if lo < left:
            self._read_half(word >> SLOT_BITS, left, lo, min(hi, left), out)
        if hi > left:
            self._read_half(word & SLOT_MASK, length - left, max(lo - left, 0), hi - left, out)

    def _read_half(self, half: int, length: int, lo: int, hi: int, out: List[int]) -> None:
        if length == 1:
            out.append(half)
        else:
            self._read(self._node_word(half), length, lo, hi, out)

    def get(self, sid: StateID, root: bool = True) -> Vector:
        out: List[int] = []
        self._read(self._top_word(sid, root), sid.length, 0, sid.length, out)
        return out

    def get_partial(self, sid: StateID, offset: int, length: int, root: bool = True) -> Vector:
        check_range(sid, offset, length)
        out: List[int] = []
        self._read(self._top_word(sid, root), sid.length, offset, offset + length, out)
        return out

    # ---------- incremental updates ----------

    def _children(self, span: _Span) -> Tuple[_Span, _Span]:
        word = span.word if span.word is not None else self._node_word(span.half)
        left = lpst(span.length)
        return (_Span(span.offset, left, word >> SLOT_BITS, None),
                _Span(span.offset + left, span.length - left, word & SLOT_MASK, None))

    def _narrow(self, span: Optional[_Span], offset: int, length: int) -> Optional[_Span]:
        """Smallest old subtree covering the part of [offset, offset+length) that it holds."""
        if span is None:
            return None
        lo = max(offset, span.offset)
        hi = min(offset + length, span.offset + span.length)
        if lo >= hi:
            return None
        while span.length > 1:
            mid = span.offset + lpst(span.length)
            if hi <= mid:
                span = self._children(span)[0]
            elif lo >= mid:
                span = self._children(span)[1]
            else:
                break
        return span

    def _compose(self, offset: int, length: int, entries: Entries, span: Optional[_Span]) -> int:
        if not entries and span is not None and span.offset == offset and span.length == length:
            # unaffected subtree: reuse the old half as is
            if span.half is not None:
                return span.half
            return self._store(span.word)
        if length == 1:
            return entries[0][1][0] if entries else 0
        if sum(len(data) for _, data in entries) == length:
            # fully overwritten: nothing of the old subtree survives
            span = None
        return self._store(self._compose_word(offset, length, entries, span))

    def _compose_word(self, offset: int, length: int, entries: Entries, span: Optional[_Span]) -> int:
        if span is not None and span.word is None and span.length > 1:
            span = span._replace(word=self._node_word(span.half))
        mid = offset + lpst(length)
        left_entries, right_entries = _split(entries, mid)
        left = self._compose(offset, mid - offset, left_entries, self._narrow(span, offset, mid - offset))
        right = self._compose(mid, offset + length - mid, right_entries,
                              self._narrow(span, mid, offset + length - mid))
        return _pack(left, right)

    def _apply(self, sid: StateID, entries: Entries, root: bool) -> InsertResult:
        old_word = self._top_word(sid, root)
        length = resulting_length(sid.length, entries)
        if length == 1:
            slot = entries[0][1][0] if entries else old_word >> SLOT_BITS
            return self._publish(_pack(slot, 0), 1, root)
        if sid.length == 1:
            half = old_word >> SLOT_BITS
        else:
            half = None if root else sid.index
        top = _Span(0, sid.length, half, old_word)
        return self._publish(self._compose_word(0, length, entries, top), length, root)

    def delta(self, sid: StateID, offset: int, data: Sequence[int], root: bool = True) -> InsertResult:
        return self._apply(sid, normalize_deltas([(offset, data)]), root)

    def delta_sparse(self, sid: StateID, deltas: SparseDeltaList, root: bool = True) -> InsertResult:
        return self._apply(sid, normalize_deltas(deltas), root)

    # ---------- trees of states ----------

    def _embedded(self, sid: StateID, offset: int, root: bool) -> StateID:
        check_range(sid, offset, 2)
        slots: List[int] = []
        self._read(self._top_word(sid, root), sid.length, offset, offset + 2, slots)
        return StateID.from_slots(slots[0], slots[1])

    def get_recursive(self, sid: StateID, path: OffsetPath, length: int) -> Vector:
        if not path:
            raise OutOfBoundsError("get_recursive needs a non-empty offset path")
        current, root = sid, True
        for offset in path[:-1]:
            current, root = self._embedded(current, offset, root), False
        return self.get_partial(current, path[-1], length, root)

    def delta_recursive_sparse(self, sid: StateID, path: OffsetPath,
                               deltas: SparseDeltaList) -> InsertResult:
        return self._descend_delta(sid, list(path), normalize_deltas(deltas), True)

    def _descend_delta(self, sid: StateID, path: List[int], entries: Entries, root: bool) -> InsertResult:
        if not path:
            return self._apply(sid, entries, root)
        child = self._descend_delta(self._embedded(sid, path[0], root), path[1:], entries, False)
        return self._apply(sid, [(path[0], child.id.to_slots())], root)

    # ---------- accounting ----------

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
