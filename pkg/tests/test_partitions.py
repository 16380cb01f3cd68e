import math
from collections import Counter

import pytest

from _oracles import ordered_partitions_by_surjection
from ntr_mix.errors import CapExceeded
from ntr_mix.partitions import (
    OrderedPartition,
    Partition,
    bell,
    enumerate_ordered,
    extensions,
    forget_order,
    ordered_bell,
    orderings_of,
    set_partitions,
)


@pytest.mark.parametrize("n, expected", [(1, 1), (3, 13), (4, 75)])
def test_enumeration_counts(n, expected):
    assert sum(1 for _ in enumerate_ordered(n)) == expected


@pytest.mark.parametrize("n", range(1, 7))
def test_enumeration_matches_surjections(n):
    ours = [m.blocks for m in enumerate_ordered(n)]
    assert len(ours) == len(set(ours))
    assert set(ours) == ordered_partitions_by_surjection(n)
    assert len(ours) == ordered_bell(n)


def test_ordered_bell_and_bell_values():
    assert [ordered_bell(n) for n in range(9)] == [1, 1, 3, 13, 75, 541, 4683, 47293, 545835]
    assert [bell(n) for n in range(7)] == [1, 1, 2, 5, 15, 52, 203]
    assert [sum(1 for _ in set_partitions(n)) for n in range(1, 7)] == [bell(n) for n in range(1, 7)]


def test_enumeration_is_deterministic():
    assert list(enumerate_ordered(4)) == list(enumerate_ordered(4))
    first = list(enumerate_ordered(3))[:3]
    assert [m.blocks for m in first] == [((1, 2, 3),), ((1, 2), (3,)), ((3,), (1, 2))]


def test_cap():
    with pytest.raises(CapExceeded):
        next(enumerate_ordered(9))
    with pytest.raises(CapExceeded):
        next(enumerate_ordered(5, cap=4))


@pytest.mark.parametrize(
    "blocks, count",
    [([[1, 2, 3]], 1), ([[1, 2], [3]], 2), ([[1], [2, 4], [3]], 6)],
)
def test_orderings_of(blocks, count):
    out = list(orderings_of(Partition(blocks)))
    assert len(out) == count == len(set(out))


def test_forget_order_examples():
    assert forget_order(OrderedPartition([[2], [1, 3]])) == Partition([[1, 3], [2]])
    assert forget_order(OrderedPartition([[1, 2]])).blocks == ((1, 2),)
    assert forget_order(OrderedPartition([[1], [2], [3]])).blocks == ((1,), (2,), (3,))


def test_partition_canonical_form():
    p = Partition([[3, 2], [1]])
    assert p.blocks == ((1,), (2, 3))
    assert p == Partition([[1], [3, 2]])
    assert hash(p) == hash(Partition([(2, 3), (1,)]))


@pytest.mark.parametrize("n", range(1, 7))
def test_orbits_have_factorial_size(n):
    classes = Counter(forget_order(m) for m in enumerate_ordered(n))
    for p, size in classes.items():
        assert size == math.factorial(p.num_blocks)


@pytest.mark.parametrize("n", range(1, 6))
def test_at_risk_counts(n):
    for m in enumerate_ordered(n):
        r = m.at_risk
        assert r[0] == 0 and r[-1] == n
        assert all(a < b for a, b in zip(r, r[1:]))
        assert [b - a for a, b in zip(r, r[1:])] == list(m.sizes)


@pytest.mark.parametrize(
    "blocks", [[[1], [1, 2]], [[1], [3]], [[1], []], [[0, 1]]]
)
def test_invalid_blocks(blocks):
    with pytest.raises(ValueError):
        OrderedPartition(blocks)


def test_extensions_cover_next_level():
    m = OrderedPartition([[1], [2, 3]])
    ext = extensions(m, 4)
    assert len(ext) == 2 + 3
    assert ext[2].blocks == ((4,), (1,), (2, 3))
    assert ext[4].blocks == ((1,), (2, 3), (4,))
    # every ordered partition of 4 items arises from exactly one parent
    parents = Counter()
    for m3 in enumerate_ordered(3):
        for e in extensions(m3, 4):
            parents[e] += 1
    assert set(parents) == set(enumerate_ordered(4))
    assert set(parents.values()) == {1}
