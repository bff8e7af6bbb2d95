#!/usr/bin/env python3
"""
State storage contract shared by dtree and the baseline stores.

A state is a vector of 32-bit slots. Stores hand out a StateID (40-bit set
index + 24-bit length) for every stored vector and answer full or partial
reads, delta updates, sparse delta updates and their recursive variants
through embedded StateIDs.
"""

from typing import List, NamedTuple, Sequence, Tuple

SLOT_BITS = 32
SLOT_MASK = (1 << SLOT_BITS) - 1
INDEX_BITS = 40
LENGTH_BITS = 24
INDEX_MASK = (1 << INDEX_BITS) - 1
LENGTH_MASK = (1 << LENGTH_BITS) - 1
MAX_LENGTH = LENGTH_MASK  # 2^24 - 1 slots

Vector = List[int]
SparseDeltaList = Sequence[Tuple[int, Sequence[int]]]
OffsetPath = Sequence[int]


# =======================
# Errors
# =======================

class StorageError(Exception):
    """Base class of every storage failure."""


class CapacityExhaustedError(StorageError):
    pass


class LengthOutOfRangeError(StorageError, ValueError):
    pass


class VectorTooLongError(LengthOutOfRangeError):
    pass


class InvalidSlotError(StorageError, ValueError):
    pass


class UnknownStateIDError(StorageError):
    pass


class UnoccupiedIndexError(UnknownStateIDError):
    pass


class MalformedStateIDError(UnknownStateIDError):
    pass


class OutOfBoundsError(StorageError, IndexError):
    pass


class InvalidDeltaError(StorageError, ValueError):
    pass


class ReservedValueError(StorageError):
    pass


class ConfigurationError(StorageError, ValueError):
    pass


# =======================
# Data model
# =======================

class StateID(NamedTuple):
    """Handle of a stored state: upper 40 bits index, lower 24 bits length."""
    index: int
    length: int

    @property
    def word(self) -> int:
        return (self.index << LENGTH_BITS) | self.length

    @classmethod
    def from_word(cls, word: int) -> 'StateID':
        return cls(word >> LENGTH_BITS, word & LENGTH_MASK)

    def to_slots(self) -> List[int]:
        """Embed as two slots: low 32 bits first, then the high 32 bits."""
        word = self.word
        return [word & SLOT_MASK, word >> SLOT_BITS]

    @classmethod
    def from_slots(cls, lo: int, hi: int) -> 'StateID':
        sid = cls.from_word((hi << SLOT_BITS) | lo)
        if sid.length == 0:
            raise MalformedStateIDError(f"Embedded StateID {lo:#x}/{hi:#x} has length 0")
        return sid


class InsertResult(NamedTuple):
    id: StateID
    is_new: bool


def check_vector(vector: Sequence[int]) -> None:
    n = len(vector)
    if n < 1 or n > MAX_LENGTH:
        raise LengthOutOfRangeError(f"Vector length {n} outside 1..{MAX_LENGTH}")
    for slot in vector:
        if not 0 <= slot <= SLOT_MASK:
            raise InvalidSlotError(f"Slot value {slot!r} is not a 32-bit unsigned integer")


def check_range(sid: StateID, offset: int, length: int) -> None:
    if length < 1 or offset < 0 or offset + length > sid.length:
        raise OutOfBoundsError(
            f"Range [{offset}, {offset + length}) outside state of length {sid.length}"
        )


def normalize_deltas(deltas: SparseDeltaList) -> List[Tuple[int, List[int]]]:
    """Validate a sparse delta list and return it as (offset, list) pairs."""
    entries = []
    end = 0
    for offset, data in deltas:
        data = list(data)
        if not data:
            raise InvalidDeltaError(f"Empty delta at offset {offset}")
        if offset < 0:
            raise InvalidDeltaError(f"Negative delta offset {offset}")
        if entries and offset < end:
            raise InvalidDeltaError(
                f"Delta at offset {offset} is unsorted or overlaps the previous entry ending at {end}"
            )
        for slot in data:
            if not 0 <= slot <= SLOT_MASK:
                raise InvalidSlotError(f"Slot value {slot!r} is not a 32-bit unsigned integer")
        end = offset + len(data)
        entries.append((offset, data))
    if end > MAX_LENGTH:
        raise LengthOutOfRangeError(f"Delta ends at {end}, beyond {MAX_LENGTH}")
    return entries


def resulting_length(length: int, entries: Sequence[Tuple[int, Sequence[int]]]) -> int:
    if not entries:
        return length
    last_offset, last_data = entries[-1]
    return max(length, last_offset + len(last_data))


def overlay(vector: Sequence[int], entries: Sequence[Tuple[int, Sequence[int]]]) -> Vector:
    """Apply sorted delta entries to a copy of vector, zero-filling any gap."""
    result = list(vector)
    new_length = resulting_length(len(result), entries)
    if new_length > len(result):
        result.extend([0] * (new_length - len(result)))
    for offset, data in entries:
        result[offset:offset + len(data)] = data
    return result


# =======================
# Storage contract
# =======================

class StateStorage:
    """
    Base class of all state stores.

    Subclasses provide insert, get and stats. The remaining operations have
    compose-style defaults (read, overlay, insert) which the baseline stores
    use as is; dtree overrides them with single-traversal versions.
    """

    name = 'abstract'

    def insert(self, vector: Sequence[int], root: bool = True) -> InsertResult:
        raise NotImplementedError

    def get(self, sid: StateID, root: bool = True) -> Vector:
        raise NotImplementedError

    def stats(self) -> dict:
        raise NotImplementedError

    def get_partial(self, sid: StateID, offset: int, length: int, root: bool = True) -> Vector:
        check_range(sid, offset, length)
        return self.get(sid, root)[offset:offset + length]

    def delta(self, sid: StateID, offset: int, data: Sequence[int], root: bool = True) -> InsertResult:
        return self.delta_sparse(sid, [(offset, data)], root)

    def delta_sparse(self, sid: StateID, deltas: SparseDeltaList, root: bool = True) -> InsertResult:
        entries = normalize_deltas(deltas)
        return self.insert(overlay(self.get(sid, root), entries), root)

    def get_recursive(self, sid: StateID, path: OffsetPath, length: int) -> Vector:
        if not path:
            raise OutOfBoundsError("get_recursive needs a non-empty offset path")
        current, root = sid, True
        for offset in path[:-1]:
            lo, hi = self.get_partial(current, offset, 2, root)
            current, root = StateID.from_slots(lo, hi), False
        return self.get_partial(current, path[-1], length, root)

    def delta_recursive_sparse(self, sid: StateID, path: OffsetPath,
                               deltas: SparseDeltaList) -> InsertResult:
        chain = [sid]
        for depth, offset in enumerate(path):
            lo, hi = self.get_partial(chain[-1], offset, 2, depth == 0)
            chain.append(StateID.from_slots(lo, hi))
        result = self.delta_sparse(chain[-1], deltas, not path)
        for depth in range(len(path) - 1, -1, -1):
            result = self.delta_sparse(chain[depth], [(path[depth], result.id.to_slots())], depth == 0)
        return result
