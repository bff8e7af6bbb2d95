#!/usr/bin/env python3
"""
Node-count analyzer for the four compression tree schemas.

Simulates inserting a sequence of vectors under a schema with exact set
semantics (no hashing, no concurrency) and reports how many nodes each
insert adds. Used to compare how well each shape shares nodes when a state
grows by appending slots.
"""

from enum import Enum
from typing import Dict, List, Sequence, Tuple

from dtree import lpst
from state_storage import SLOT_MASK


class SchemaKind(str, Enum):
    PAPER_TREEDBS = 'paper_treedbs'      # halves, left half rounded up
    IMPL_TREEDBS = 'impl_treedbs'        # array layout, pairs formed from the end
    IMPL_BACKWARDS = 'impl_backwards'    # array layout, pairs formed from the start
    DTREE_CHAIN = 'dtree_chain'          # chain of perfectly balanced trees


# 40-byte state, then the same state with one 4-byte slot appended
BUILTIN_SCENARIOS: Dict[str, List[List[int]]] = {
    'fig34': [list(range(1, 11)), list(range(1, 12))],
    'growth': [list(range(1, n + 1)) for n in range(8, 13)],
}
BUILTIN_SCENARIOS['append'] = BUILTIN_SCENARIOS['fig34']


class ScenarioError(ValueError):
    pass


class _NodeCounter:
    """Data set and root set as plain dictionaries."""

    def __init__(self):
        self.data: Dict[Tuple, int] = {}
        self.roots: set = set()
        self.added = 0

    def node(self, left: Tuple, right: Tuple) -> Tuple:
        key = (left, right)
        if key not in self.data:
            self.data[key] = len(self.data)
            self.added += 1
        return ('node', self.data[key])

    def root(self, left: Tuple, right: Tuple, length: int) -> None:
        key = (left, right, length)
        if key not in self.roots:
            self.roots.add(key)
            self.added += 1

    @property
    def total(self) -> int:
        return len(self.data) + len(self.roots)


def _slot(value: int) -> Tuple:
    return ('slot', value)


def _split_tree(counter: _NodeCounter, vector: Sequence[int], left_size) -> None:
    def half(offset: int, length: int) -> Tuple:
        if length == 1:
            return _slot(vector[offset])
        left = left_size(length)
        return counter.node(half(offset, left), half(offset + left, length - left))

    n = len(vector)
    left = left_size(n)
    counter.root(half(0, left), half(left, n - left), n)


def _array_tree(counter: _NodeCounter, vector: Sequence[int]) -> None:
    size = len(vector)
    halves: Dict[int, Tuple] = {}

    def half(position: int) -> Tuple:
        return _slot(vector[position - size]) if position >= size else halves[position]

    for n in range(size - 1, 1, -1):
        halves[n] = counter.node(half(2 * n), half(2 * n + 1))
    counter.root(half(2), half(3), size)


def _insert(kind: SchemaKind, counter: _NodeCounter, vector: Sequence[int]) -> None:
    if len(vector) == 1:
        counter.root(_slot(vector[0]), _slot(0), 1)
    elif kind is SchemaKind.DTREE_CHAIN:
        _split_tree(counter, vector, lpst)
    elif kind is SchemaKind.PAPER_TREEDBS:
        _split_tree(counter, vector, lambda length: (length + 1) // 2)
    elif kind is SchemaKind.IMPL_TREEDBS:
        _array_tree(counter, vector)
    else:
        _array_tree(counter, list(reversed(vector)))


def analyze_schema(kind: SchemaKind, vectors: Sequence[Sequence[int]]) -> List[dict]:
    """Insert vectors in order; one row per insert with nodes added and running total."""
    kind = SchemaKind(kind)
    counter = _NodeCounter()
    rows = []
    for step, vector in enumerate(vectors):
        counter.added = 0
        _insert(kind, counter, vector)
        rows.append({
            'schema': kind.value,
            'step': step,
            'length': len(vector),
            'added': counter.added,
            'total': counter.total,
        })
    return rows


def compare_schemas(vectors: Sequence[Sequence[int]]) -> List[dict]:
    rows = []
    for kind in SchemaKind:
        rows.extend(analyze_schema(kind, vectors))
    return rows


def parse_scenario(text: str) -> List[List[int]]:
    """One vector per line, slots as comma-separated decimals; '#' starts a comment."""
    vectors = []
    for line_no, line in enumerate(text.splitlines(), 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        try:
            vector = [int(field) for field in line.split(',')]
        except ValueError:
            raise ScenarioError(f"Line {line_no}: expected comma-separated integers, got {line!r}")
        if any(not 0 <= slot <= SLOT_MASK for slot in vector):
            raise ScenarioError(f"Line {line_no}: slot outside 0..{SLOT_MASK}")
        vectors.append(vector)
    if not vectors:
        raise ScenarioError("Scenario contains no vectors")
    return vectors


def load_scenario(source: str) -> List[List[int]]:
    """Built-in scenario name or path to a scenario file."""
    if source in BUILTIN_SCENARIOS:
        return [list(v) for v in BUILTIN_SCENARIOS[source]]
    try:
        with open(source, 'r') as f:
            return parse_scenario(f.read())
    except OSError as e:
        raise ScenarioError(f"Cannot read scenario {source!r}: {e}")
