"""The free Boolean algebra as finite unions of half-open rational intervals.

Generators are dyadic digit sets: ``p_n`` is the set of reals in ``[0, 1)``
whose binary digit ``n + 1`` is 1.  They are independent, so every sign
pattern over finitely many of them has nonempty meet.

An element built from ``p_0 .. p_{N-1}`` is a union of level-``N`` dyadic
cells, and those cells are exactly the atoms of the subalgebra they
generate.  Ideal membership for the ideal generated by ``{p_n - p_k : n <= k}``
reduces to one dominance test: ``w`` is in the ideal iff ``w`` lies below the
join of the finitely many in-range generator differences.  A generator
difference using an index ``>= N`` cannot help, because the assignment
sending that generator to 0 (or 1) kills it while fixing ``w``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from itertools import product
from typing import Iterable

import numpy as np

from .relcore import PreorderTable

__all__ = [
    "IntervalSet",
    "ZERO",
    "ONE",
    "meet",
    "join",
    "complement",
    "difference",
    "leq",
    "generator",
    "generator_product",
    "OffGrid",
    "on_grid",
    "ideal_generator_join",
    "ideal_member",
    "quotient_leq",
    "atoms_of",
    "from_atoms",
    "atom_ideal_member",
    "homomorphism_image",
    "random_element",
    "canonical_code",
    "enumerate_grid",
]

_F0, _F1 = Fraction(0), Fraction(1)


@dataclass(frozen=True)
class IntervalSet:
    intervals: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "intervals", _canon(self.intervals))

    @classmethod
    def of(cls, *pairs) -> "IntervalSet":
        return cls(tuple((Fraction(a), Fraction(b)) for a, b in pairs))

    def is_zero(self) -> bool:
        return not self.intervals

    def measure(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), _F0)

    def to_text(self) -> str:
        return ";".join(f"{_frac(a)},{_frac(b)}" for a, b in self.intervals)

    @classmethod
    def from_text(cls, text: str) -> "IntervalSet":
        text = text.strip()
        if not text:
            return cls()
        pairs = []
        for part in text.split(";"):
            lo, hi = part.split(",")
            pairs.append((Fraction(lo.strip()), Fraction(hi.strip())))
        return cls(tuple(pairs))

    def __str__(self) -> str:
        return self.to_text() or "0"

    def __and__(self, other):
        return meet(self, other)

    def __or__(self, other):
        return join(self, other)

    def __invert__(self):
        return complement(self)

    def __sub__(self, other):
        return difference(self, other)


def _frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _canon(pairs) -> tuple:
    items = []
    for a, b in pairs:
        a, b = Fraction(a), Fraction(b)
        if not (_F0 <= a and b <= _F1):
            raise ValueError(f"interval [{a},{b}) not inside [0,1)")
        if a < b:
            items.append((a, b))
    items.sort()
    out = []
    for a, b in items:
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return tuple(out)


ZERO = IntervalSet()
ONE = IntervalSet(((_F0, _F1),))


def complement(a: IntervalSet) -> IntervalSet:
    out = []
    cur = _F0
    for lo, hi in a.intervals:
        if cur < lo:
            out.append((cur, lo))
        cur = hi
    if cur < _F1:
        out.append((cur, _F1))
    return IntervalSet(tuple(out))


def join(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    return IntervalSet(a.intervals + b.intervals)


def meet(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    out = []
    i = j = 0
    A, B = a.intervals, b.intervals
    while i < len(A) and j < len(B):
        lo = max(A[i][0], B[j][0])
        hi = min(A[i][1], B[j][1])
        if lo < hi:
            out.append((lo, hi))
        if A[i][1] < B[j][1]:
            i += 1
        else:
            j += 1
    return IntervalSet(tuple(out))


def difference(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    return meet(a, complement(b))


def leq(a: IntervalSet, b: IntervalSet) -> bool:
    return difference(a, b).is_zero()


@lru_cache(maxsize=64)
def generator(n: int) -> IntervalSet:
    if n < 0:
        raise ValueError("generator index must be natural")
    den = 2 ** (n + 1)
    return IntervalSet(tuple((Fraction(k, den), Fraction(k + 1, den)) for k in range(1, den, 2)))


def generator_product(signs: Iterable[int]) -> IntervalSet:
    """``meet_i p_i^(s_i)`` where sign 1 means complemented."""
    out = ONE
    for i, s in enumerate(signs):
        g = generator(i)
        out = meet(out, complement(g) if s else g)
    return out


class OffGrid(ValueError):
    pass


def on_grid(w: IntervalSet, N: int) -> bool:
    den = 2 ** N
    return all((q * den).denominator == 1 for iv in w.intervals for q in iv)


def ideal_generator_join(P: PreorderTable, N: int) -> IntervalSet:
    return _generator_join(P.leq[:N, :N].tobytes(), N)


@lru_cache(maxsize=4096)
def _generator_join(leq_bytes: bytes, N: int) -> IntervalSet:
    leq = np.frombuffer(leq_bytes, dtype=bool).reshape(N, N)
    out = ZERO
    for n in range(N):
        for k in range(N):
            if n != k and leq[n, k]:
                out = join(out, difference(generator(n), generator(k)))
    return out


def _check(w: IntervalSet, P: PreorderTable, N: int):
    if N > P.n:
        raise ValueError(f"N={N} exceeds preorder size {P.n}")
    if not on_grid(w, N):
        raise OffGrid(f"element {w} is not a union of level-{N} dyadic cells")


def ideal_member(w: IntervalSet, P: PreorderTable, N: int, extra: int = 0) -> bool:
    """Is ``w`` in the ideal generated by ``p_n - p_k`` for ``n <= k`` in ``P``?

    ``extra`` adds differences against unused generators ``N..N+extra-1``
    (each related to each other only), which must never change the verdict.
    """
    _check(w, P, N)
    bound = ideal_generator_join(P, N)
    for a in range(N, N + extra):
        for b in range(N, N + extra):
            if a != b:
                bound = join(bound, difference(generator(a), generator(b)))
    return leq(w, bound)


def quotient_leq(a: IntervalSet, b: IntervalSet, P: PreorderTable, N: int) -> bool:
    return ideal_member(difference(a, b), P, N)


def atoms_of(w: IntervalSet, N: int) -> frozenset:
    """Indices ``c`` of the level-``N`` cells ``[c/2^N, (c+1)/2^N)`` inside ``w``."""
    if not on_grid(w, N):
        raise OffGrid(f"element {w} is not a union of level-{N} dyadic cells")
    den = 2 ** N
    out = set()
    for lo, hi in w.intervals:
        out.update(range(int(lo * den), int(hi * den)))
    return frozenset(out)


def from_atoms(cells: Iterable[int], N: int) -> IntervalSet:
    den = 2 ** N
    return IntervalSet(tuple((Fraction(c, den), Fraction(c + 1, den)) for c in cells))


def _cell_bit(c: int, n: int, N: int) -> int:
    """Digit ``n + 1`` of any point in cell ``c`` of level ``N`` (``n < N``)."""
    return (c >> (N - 1 - n)) & 1


def atom_ideal_member(w: IntervalSet, P: PreorderTable, N: int) -> bool:
    """Brute-force oracle on the ``2^N`` atoms, sharing no code with ``ideal_member``.

    A cell is bad when some ``n <= k`` has digit ``n`` set and digit ``k``
    clear; the ideal is everything made of bad cells.
    """
    cells = atoms_of(w, N)
    for c in cells:
        bad = any(_cell_bit(c, n, N) and not _cell_bit(c, k, N)
                  for n in range(N) for k in range(N) if n != k and P.leq[n, k])
        if not bad:
            return False
    return True


def homomorphism_image(w: IntervalSet, P: PreorderTable, N: int) -> frozenset:
    """Image of ``w`` under ``p_i -> {r : r <= i}`` into subsets of ``range(N)``.

    ``w`` is decomposed into atoms; the atom with digit pattern ``d`` maps to
    the points ``r`` whose down-set membership pattern ``(r <= i)_i`` equals ``d``.
    """
    cells = atoms_of(w, N)
    out = set()
    for r in range(N):
        pattern = 0
        for i in range(N):
            if P.leq[r, i]:
                pattern |= 1 << (N - 1 - i)
        if pattern in cells:
            out.add(r)
    return frozenset(out)


def random_element(rng: random.Random, N: int, density: float = 0.5) -> IntervalSet:
    cells = [c for c in range(2 ** N) if rng.random() < density]
    return from_atoms(cells, N)


def canonical_code(w: IntervalSet) -> tuple:
    """Sort key: largest endpoint denominator first, then endpoints lexicographically."""
    den = max((q.denominator for iv in w.intervals for q in iv), default=1)
    return den, tuple((a, b) for a, b in w.intervals)


def enumerate_grid(N: int) -> list:
    """All ``2^(2^N)`` elements over level-``N`` cells, in canonical code order."""
    cells = 2 ** N
    elems = [from_atoms([c for c in range(cells) if mask >> c & 1], N) for mask in range(2 ** cells)]
    return sorted(elems, key=canonical_code)


def _sign_patterns(m: int):
    return product((0, 1), repeat=m)
