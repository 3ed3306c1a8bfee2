"""A total order on the heterogeneous labels used throughout the package.

States, path identifiers and words mix ints, strings and nested tuples, which
Python refuses to compare directly. ``sort_key`` maps any such value to a key
that compares deterministically.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Iterable


def sort_key(x: Any):
    if isinstance(x, bool):
        return (0, int(x))
    if isinstance(x, (int, Fraction)):
        return (1, x)
    if isinstance(x, str):
        return (2, x)
    if isinstance(x, tuple):
        return (3, len(x), tuple(sort_key(y) for y in x))
    if isinstance(x, frozenset):
        return (4, len(x), tuple(sorted(sort_key(y) for y in x)))
    if x is None:
        return (-1,)
    return (5, type(x).__name__, repr(x))


def sorted_labels(xs: Iterable[Any]) -> list:
    return sorted(xs, key=sort_key)


class UnionFind:
    """Disjoint sets with path compression and union by size."""

    def __init__(self, items: Iterable[Any] = ()):
        self.parent: dict = {}
        self.size: dict = {}
        for x in items:
            self.add(x)

    def add(self, x) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y) -> bool:
        x, y = self.find(x), self.find(y)
        if x == y:
            return False
        if self.size[x] < self.size[y]:
            x, y = y, x
        self.parent[y] = x
        self.size[x] += self.size[y]
        return True

    def classes(self) -> dict:
        """Map each element to the least member of its class (under ``sort_key``)."""
        groups: dict = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        rep = {}
        for members in groups.values():
            least = min(members, key=sort_key)
            for m in members:
                rep[m] = least
        return rep

    def __len__(self) -> int:
        return sum(1 for x in self.parent if self.parent[x] == x)
