"""Tests for the indexed hash set."""

import random
import threading
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from indexed_hash_set import ENTRY_BYTES, IndexedHashSet, SetConfig
from state_storage import CapacityExhaustedError, ConfigurationError, UnoccupiedIndexError

ALL_ONES = (1 << 64) - 1


def test_new_set_is_empty():
    s = IndexedHashSet(SetConfig(10))
    assert s.capacity == 1024
    assert s.stats()['occupancy'] == 0
    assert s.stats()['memory_bytes'] == 0


@pytest.mark.parametrize("scale", [3, 41])
def test_scale_out_of_range(scale):
    with pytest.raises(ConfigurationError):
        SetConfig(scale)


def test_scale_28_capacity_without_touching_memory():
    assert SetConfig(28).capacity == 1 << 28


def test_failed_allocation_is_a_configuration_error(monkeypatch):
    def refuse(*args, **kwargs):
        raise MemoryError()

    monkeypatch.setattr('indexed_hash_set.np.zeros', refuse)
    with pytest.raises(ConfigurationError, match=f"Cannot allocate {1024 * ENTRY_BYTES} bytes"):
        IndexedHashSet(SetConfig(10))


def test_insert_is_idempotent():
    s = IndexedHashSet(SetConfig(8))
    first = s.insert_if_absent(12345, 0)
    second = s.insert_if_absent(12345, 0)
    assert first[1] is True
    assert second == (first[0], False)


def test_tag_distinguishes_entries():
    s = IndexedHashSet(SetConfig(8))
    a, _ = s.insert_if_absent(77, 5)
    b, _ = s.insert_if_absent(77, 6)
    assert a != b
    assert s.read(a) == (77, 5)
    assert s.read(b) == (77, 6)


def test_all_ones_value_is_storable():
    s = IndexedHashSet(SetConfig(8))
    index, is_new = s.insert_if_absent(ALL_ONES, 0)
    assert is_new
    assert s.read(index) == (ALL_ONES, 0)


def test_no_reserved_values():
    s = IndexedHashSet(SetConfig(8))
    values = [0, ALL_ONES, 0xAAAAAAAAAAAAAAAA, 0x5555555555555555, 0xFFFFFFFF, 0xFFFFFFFF00000000]
    indices = [s.insert_if_absent(v, 0)[0] for v in values]
    assert len(set(indices)) == len(values)
    assert [s.read(i)[0] for i in indices] == values


def test_read_unassigned_index():
    s = IndexedHashSet(SetConfig(6))
    with pytest.raises(UnoccupiedIndexError):
        s.read(3)
    with pytest.raises(UnoccupiedIndexError):
        s.read(1 << 6)


def test_random_values_read_back():
    rng = random.Random(7)
    s = IndexedHashSet(SetConfig(18))
    expected = {}
    for _ in range(100_000):
        value, aux = rng.getrandbits(64), rng.getrandbits(24)
        index, _ = s.insert_if_absent(value, aux)
        expected[index] = (value, aux)
    for index, pair in expected.items():
        assert s.read(index) == pair
    assert s.occupancy == len(expected)


def test_stats_formula():
    s = IndexedHashSet(SetConfig(6))
    for v in range(10):
        s.insert_if_absent(v, 0)
    stats = s.stats()
    assert stats['occupancy'] == 10
    assert stats['memory_bytes'] == 10 * ENTRY_BYTES
    assert stats['allocated_bytes'] == 64 * ENTRY_BYTES


def test_full_set_reports_capacity_exhausted():
    s = IndexedHashSet(SetConfig(4))
    for v in range(16):
        s.insert_if_absent(v, 0)
    # present values still resolve when the set is full
    assert s.insert_if_absent(3, 0)[1] is False
    with pytest.raises(CapacityExhaustedError):
        s.insert_if_absent(99, 0)


@given(st.lists(st.tuples(st.integers(0, ALL_ONES), st.integers(0, (1 << 24) - 1)), max_size=200))
def test_distinct_pairs_get_distinct_stable_indices(pairs):
    s = IndexedHashSet(SetConfig(10))
    seen = {}
    for pair in pairs:
        index, is_new = s.insert_if_absent(*pair)
        assert is_new == (pair not in seen)
        seen.setdefault(pair, index)
        assert seen[pair] == index
    assert len(set(seen.values())) == len(seen)
    for pair, index in seen.items():
        assert s.read(index) == pair


def test_concurrent_inserts_observe_one_new_per_pair():
    s = IndexedHashSet(SetConfig(16))
    rng = random.Random(1)
    values = [rng.getrandbits(64) for _ in range(5_000)]
    results = []
    lock = threading.Lock()

    def worker(seed):
        order = list(values)
        random.Random(seed).shuffle(order)
        local = [(v,) + s.insert_if_absent(v, 0) for v in order]
        with lock:
            results.extend(local)

    threads = [threading.Thread(target=worker, args=(seed,)) for seed in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    new_counts = Counter()
    indices = {}
    for v, index, is_new in results:
        new_counts[v] += is_new
        assert indices.setdefault(v, index) == index
    assert len(results) == 8 * len(values)
    assert s.occupancy == len(set(values))
    assert all(new_counts[v] == 1 for v in set(values))
