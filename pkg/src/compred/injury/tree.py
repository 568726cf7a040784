"""The binary priority tree: labels, top nodes, children and the Z sets.

Nodes are strings over ``INF`` ("i") and ``ZERO`` ("0"); ``INF`` is the left
outcome.  The node at level ``l`` works for the label ``unpair4(l)``.
"""
from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple, Sequence

from ..pi1 import pair, unpair

INF = "i"
ZERO = "0"

__all__ = [
    "INF",
    "ZERO",
    "Label",
    "pair4",
    "unpair4",
    "Tree",
    "node_code",
    "in_column",
    "column_at_least",
    "is_left_of",
]


class Label(NamedTuple):
    i: int
    j: int
    e: int
    p: int


def pair4(i: int, j: int, e: int, p: int) -> int:
    return pair(i, pair(j, pair(e, p)))


def unpair4(n: int) -> Label:
    i, rest = unpair(n)
    j, rest = unpair(rest)
    e, p = unpair(rest)
    return Label(i, j, e, p)


def node_code(alpha: str) -> int:
    """Length-prefixed integer code: ``2^|a| - 1 + bits``, with ``INF = 0``."""
    bits = 0
    for ch in alpha:
        bits = 2 * bits + (0 if ch == INF else 1)
    return (1 << len(alpha)) - 1 + bits


def in_column(x: int, alpha: str) -> bool:
    return unpair(x)[0] == node_code(alpha)


def column_at_least(alpha: str, lower: int) -> int:
    """Least member of ``alpha``'s column that is ``>= lower``."""
    c = node_code(alpha)
    lo, hi = 0, max(1, lower)
    while pair(c, hi) < lower:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if pair(c, mid) >= lower:
            hi = mid
        else:
            lo = mid + 1
    return pair(c, lo)


def is_left_of(a: str, b: str) -> bool:
    """``a`` branches left of ``b`` (neither is a prefix of the other)."""
    for x, y in zip(a, b):
        if x != y:
            return x == INF
    return False


class Tree:
    def __init__(self, depth: int, labels: Sequence[Label] = None):
        if depth < 0:
            raise ValueError("depth must be natural")
        self.depth = depth
        self.labels = tuple(labels) if labels is not None else tuple(unpair4(l) for l in range(depth))
        if len(self.labels) < depth:
            raise ValueError("fewer labels than tree levels")
        self.is_top = lru_cache(maxsize=None)(self._is_top)
        self.top_of = lru_cache(maxsize=None)(self._top_of)
        self.z_sets = lru_cache(maxsize=None)(self._z_sets)

    def label(self, alpha: str) -> Label:
        return self.labels[len(alpha)]

    def ij(self, alpha: str) -> tuple:
        lab = self.labels[len(alpha)]
        return lab.i, lab.j

    def indices(self) -> int:
        """Number of V sets the labels mention."""
        return 1 + max((max(l.i, l.j) for l in self.labels[: self.depth]), default=0)

    def _same_pair_prefixes(self, alpha: str) -> list:
        ij = self.ij(alpha)
        return [alpha[:n] for n in range(len(alpha)) if self.ij(alpha[:n]) == ij]

    def _is_top(self, alpha: str) -> bool:
        if len(alpha) >= self.depth:
            raise ValueError(f"node {alpha!r} is below the tree depth {self.depth}")
        prev = self._same_pair_prefixes(alpha)
        return not prev or alpha[len(prev[-1])] == INF

    def _top_of(self, alpha: str) -> str:
        if self.is_top(alpha):
            return alpha
        tops = [b for b in self._same_pair_prefixes(alpha) if self.is_top(b)]
        return tops[-1]

    def classify(self, alpha: str) -> tuple:
        """``("top", alpha)`` or ``("child", tau)``."""
        if self.is_top(alpha):
            return "top", alpha
        return "child", self.top_of(alpha)

    def _z_sets(self, alpha: str) -> tuple:
        z0 = tuple(alpha[:n] for n in range(len(alpha)) if alpha[n] == ZERO and self.is_top(alpha[:n]))
        zi = tuple(alpha[:n] for n in range(len(alpha)) if alpha[n] == INF and not self.is_top(alpha[:n]))
        return z0, zi
