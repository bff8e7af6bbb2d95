#!/usr/bin/env python3
"""
Fixed-capacity concurrent indexed hash set of 64-bit node values.

Open addressing with linear probing over a power-of-two bucket array; the
final bucket position is the index handed out. Occupancy and the 24-bit aux
tag live in a separate status array, so every 64-bit value (all-ones
included) can be stored.
"""

import logging
import threading
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from state_storage import (
    CapacityExhaustedError,
    ConfigurationError,
    UnoccupiedIndexError,
)

logger = logging.getLogger(__name__)

SET_SCALE_MIN = 4
SET_SCALE_MAX = 40
# data indices are paired into one 64-bit node
DATA_SCALE_MAX = 32

VALUE_MASK = (1 << 64) - 1
TAG_MASK = (1 << 24) - 1
_OCCUPIED = 1 << 31
_LOCK_STRIPES = 1024

# value (uint64) + status word (uint32)
ENTRY_BYTES = 12

DEFAULT_SEED = 0x2545F4914F6CDD1D


def _mix64(x: int) -> int:
    """splitmix64 finalizer."""
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & VALUE_MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & VALUE_MASK
    return x ^ (x >> 31)


@dataclass(frozen=True)
class SetConfig:
    scale: int
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not SET_SCALE_MIN <= self.scale <= SET_SCALE_MAX:
            raise ConfigurationError(
                f"Set scale {self.scale} outside {SET_SCALE_MIN}..{SET_SCALE_MAX}"
            )

    @property
    def capacity(self) -> int:
        return 1 << self.scale


class IndexedHashSet:
    """Insert-if-absent map (value, aux) -> stable bucket index."""

    def __init__(self, config: SetConfig):
        self.config = config
        self._capacity = config.capacity
        self._mask = self._capacity - 1
        self._seed = config.seed & VALUE_MASK
        try:
            self._values = np.zeros(self._capacity, dtype=np.uint64)
            self._status = np.zeros(self._capacity, dtype=np.uint32)
        except MemoryError:
            raise ConfigurationError(
                f"Cannot allocate {self._capacity * ENTRY_BYTES} bytes for a set of scale {config.scale}"
            ) from None
        stripes = min(self._capacity, _LOCK_STRIPES)
        self._stripe_mask = stripes - 1
        self._locks = [threading.Lock() for _ in range(stripes)]
        self._count_lock = threading.Lock()
        self._occupancy = 0
        logger.debug("Allocated indexed hash set with 2^%d buckets", config.scale)

    @property
    def capacity(self) -> int:
        return self._capacity

    @property
    def occupancy(self) -> int:
        return self._occupancy

    def _home(self, value: int, aux: int) -> int:
        return _mix64(value ^ ((aux * 0x9E3779B97F4A7C15) & VALUE_MASK) ^ self._seed) & self._mask

    def insert_if_absent(self, value: int, aux: int = 0) -> Tuple[int, bool]:
        if not 0 <= value <= VALUE_MASK:
            raise ValueError(f"Node value {value!r} is not a 64-bit unsigned integer")
        if not 0 <= aux <= TAG_MASK:
            raise ValueError(f"Tag {aux!r} does not fit 24 bits")

        values = self._values
        statuses = self._status
        bucket = self._home(value, aux)
        for _ in range(self._capacity):
            status = int(statuses[bucket])
            if not status & _OCCUPIED:
                # Claim: buckets never empty again, so the first empty bucket
                # on the probe sequence is decided under its stripe lock.
                with self._locks[bucket & self._stripe_mask]:
                    status = int(statuses[bucket])
                    if not status & _OCCUPIED:
                        values[bucket] = value
                        statuses[bucket] = _OCCUPIED | aux
                        with self._count_lock:
                            self._occupancy += 1
                        return bucket, True
            if (status & TAG_MASK) == aux and int(values[bucket]) == value:
                return bucket, False
            bucket = (bucket + 1) & self._mask

        logger.debug("Indexed hash set of 2^%d buckets is full", self.config.scale)
        raise CapacityExhaustedError(
            f"Indexed hash set full: {self._occupancy}/{self._capacity} buckets occupied"
        )

    def read(self, index: int) -> Tuple[int, int]:
        if not 0 <= index < self._capacity:
            raise UnoccupiedIndexError(f"Index {index} outside set of capacity {self._capacity}")
        status = int(self._status[index])
        if not status & _OCCUPIED:
            raise UnoccupiedIndexError(f"Index {index} is not occupied")
        return int(self._values[index]), status & TAG_MASK

    def stats(self) -> dict:
        occupancy = self._occupancy
        return {
            'capacity': self._capacity,
            'occupancy': occupancy,
            'memory_bytes': occupancy * ENTRY_BYTES,
            'allocated_bytes': self._capacity * ENTRY_BYTES,
        }
