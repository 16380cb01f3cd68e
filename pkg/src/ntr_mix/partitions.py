"""Ordered (ranked) and unordered set partitions of ``{1, ..., n}``.

Items are labelled from 1.  An :class:`OrderedPartition` lists its blocks by
rank: block ``j`` holds the items tied at the j-th largest latent time, so
``r[j]`` counts the items in blocks ``1..j`` (the "at risk" count).
"""
from __future__ import annotations

import itertools
from math import comb
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import CapExceeded

__all__ = [
    "OrderedPartition",
    "Partition",
    "DEFAULT_ENUMERATION_CAP",
    "set_partitions",
    "enumerate_ordered",
    "orderings_of",
    "forget_order",
    "ordered_bell",
    "bell",
]

DEFAULT_ENUMERATION_CAP = 8

Blocks = tuple[tuple[int, ...], ...]


def _normalise_blocks(blocks: Iterable[Iterable[int]]) -> Blocks:
    out = tuple(tuple(sorted(b)) for b in blocks)
    if any(len(b) == 0 for b in out):
        raise ValueError("blocks must be nonempty")
    items = sorted(i for b in out for i in b)
    if items != list(range(1, len(items) + 1)):
        raise ValueError(f"blocks must be disjoint and cover 1..n, got {out}")
    return out


@dataclass(frozen=True)
class OrderedPartition:
    """Blocks ``(D_1, ..., D_k)`` in rank order."""

    blocks: Blocks

    def __init__(self, blocks: Iterable[Iterable[int]]):
        object.__setattr__(self, "blocks", _normalise_blocks(blocks))

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    @property
    def at_risk(self) -> tuple[int, ...]:
        """Cumulative counts ``(r_0, r_1, ..., r_k)`` with ``r_0 = 0``."""
        return (0, *itertools.accumulate(self.sizes))

    @classmethod
    def _trusted(cls, blocks: Blocks) -> "OrderedPartition":
        # skips validation; blocks must already be sorted tuples covering 1..n
        obj = object.__new__(cls)
        object.__setattr__(obj, "blocks", blocks)
        return obj

    def __len__(self) -> int:
        return len(self.blocks)

    def __repr__(self) -> str:
        inner = ", ".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)
        return f"OrderedPartition({inner})"


@dataclass(frozen=True)
class Partition:
    """Unordered blocks, stored canonically by least element."""

    blocks: Blocks

    def __init__(self, blocks: Iterable[Iterable[int]]):
        canon = tuple(sorted(_normalise_blocks(blocks), key=lambda b: b[0]))
        object.__setattr__(self, "blocks", canon)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __repr__(self) -> str:
        inner = ", ".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)
        return f"Partition({inner})"


def _restricted_growth_strings(n: int) -> Iterator[list[int]]:
    """Restricted-growth strings of length ``n`` in lexicographic order."""
    if n == 0:
        yield []
        return
    a = [0] * n
    while True:
        yield list(a)
        # rightmost position that can still be incremented
        i = n - 1
        while i > 0 and a[i] > max(a[:i]):
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for k in range(i + 1, n):
            a[k] = 0


def set_partitions(n: int) -> Iterator[Partition]:
    """All unordered partitions of ``{1..n}``; ``Bell(n)`` of them."""
    for rgs in _restricted_growth_strings(n):
        blocks: list[list[int]] = [[] for _ in range(max(rgs) + 1)] if rgs else []
        for item, label in enumerate(rgs, start=1):
            blocks[label].append(item)
        yield Partition(blocks)


def enumerate_ordered(n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[OrderedPartition]:
    """Every ordered partition of ``{1..n}`` exactly once (lazily).

    Unordered partitions come in restricted-growth order and each is followed
    by all permutations of its blocks.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if n > cap:
        raise CapExceeded(f"n={n} exceeds enumeration cap {cap}")
    for p in set_partitions(n):
        yield from orderings_of(p)


def orderings_of(p: Partition) -> Iterator[OrderedPartition]:
    """The ``k!`` rank assignments of the blocks of ``p``."""
    for perm in itertools.permutations(p.blocks):
        yield OrderedPartition._trusted(perm)


def forget_order(m: OrderedPartition) -> Partition:
    return Partition(m.blocks)


def bell(n: int) -> int:
    # Bell triangle
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def ordered_bell(n: int) -> int:
    """Fubini number: ``a(n) = sum_k C(n, k) a(n - k)``."""
    a = [1]
    for m in range(1, n + 1):
        a.append(sum(comb(m, k) * a[m - k] for k in range(1, m + 1)))
    return a[n]


def insert_block(m: OrderedPartition, rank: int, item: int) -> OrderedPartition:
    """Insert singleton ``{item}`` so it becomes block number ``rank`` (1-based)."""
    blocks = list(m.blocks)
    blocks.insert(rank - 1, (item,))
    return OrderedPartition(blocks)


def join_block(m: OrderedPartition, rank: int, item: int) -> OrderedPartition:
    blocks = list(m.blocks)
    blocks[rank - 1] = blocks[rank - 1] + (item,)
    return OrderedPartition(blocks)


def extensions(m: OrderedPartition | None, item: int) -> Sequence[OrderedPartition]:
    """All one-item extensions of ``m``: joins (ranks 1..k) then new blocks (ranks 1..k+1)."""
    if m is None or m.num_blocks == 0:
        return [OrderedPartition([(item,)])]
    k = m.num_blocks
    joins = [join_block(m, j, item) for j in range(1, k + 1)]
    news = [insert_block(m, j, item) for j in range(1, k + 2)]
    return joins + news
