"""Finite relations, preorders, stagewise partition schedules, reductions.

Relations are sets of unordered pairs of *distinct* points; reflexivity is
implicit and never stored.  A ``PartitionSchedule`` is the canonical finite
presentation of a co-r.e. equivalence relation: a refining sequence of
partitions of ``range(n)`` that is constant from ``stable_from`` on.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

__all__ = [
    "FinRelation",
    "PreorderTable",
    "PartitionSchedule",
    "ReductionMap",
    "ReductionReport",
    "ScheduleReport",
    "transitive_closure",
    "is_locally_transitive",
    "is_equivalence",
    "disjoint_sum",
    "symmetric_fragment",
    "verify_reduction",
    "stage_relation",
    "validate_schedule",
    "relation_from_partition",
    "random_schedule",
    "random_preorder",
    "all_preorders",
]


def _norm(u: int, v: int) -> tuple:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class FinRelation:
    """Unordered pairs ``{u, v}`` with ``u != v`` over ``range(n)``."""

    n: int
    pairs: frozenset = frozenset()

    def __post_init__(self):
        norm = set()
        for p in self.pairs:
            u, v = p
            if u == v:
                raise ValueError(f"pair {{{u},{u}}} is not allowed; reflexivity is implicit")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"pair {{{u},{v}}} outside universe of size {self.n}")
            norm.add(_norm(u, v))
        object.__setattr__(self, "pairs", frozenset(norm))

    @classmethod
    def of(cls, n: int, pairs: Iterable) -> "FinRelation":
        return cls(n, frozenset(tuple(p) for p in pairs))

    def related(self, u: int, v: int) -> bool:
        return u == v or _norm(u, v) in self.pairs

    def __contains__(self, pair) -> bool:
        u, v = pair
        return _norm(u, v) in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)

    def components(self) -> list:
        parent = list(range(self.n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for u, v in self.pairs:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
        blocks = {}
        for x in range(self.n):
            blocks.setdefault(find(x), []).append(x)
        return sorted(blocks.values())


@dataclass(frozen=True)
class PreorderTable:
    """Reflexive, transitive ``leq`` matrix on ``range(n)``."""

    leq: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.leq, dtype=bool)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("leq must be a square matrix")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "leq", m)

    @property
    def n(self) -> int:
        return self.leq.shape[0]

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable) -> "PreorderTable":
        """Reflexive-transitive closure of the given ordered pairs."""
        m = np.eye(n, dtype=bool)
        for a, b in pairs:
            m[a, b] = True
        for k in range(n):
            m |= np.outer(m[:, k], m[k, :])
        return cls(m)

    def check(self) -> list:
        """Violations of reflexivity/transitivity, as readable strings."""
        out = []
        m = self.leq
        for i in range(self.n):
            if not m[i, i]:
                out.append(f"not reflexive at {i}")
        comp = (m.astype(np.int64) @ m.astype(np.int64)) > 0
        bad = np.argwhere(comp & ~m)
        for i, k in bad:
            out.append(f"not transitive: {i} <= ... <= {k} but not {i} <= {k}")
        return out

    def __call__(self, a: int, b: int) -> bool:
        return bool(self.leq[a, b])


def relation_from_partition(n: int, blocks: Iterable[Sequence[int]]) -> FinRelation:
    pairs = set()
    for b in blocks:
        pairs.update(combinations(sorted(b), 2))
    return FinRelation(n, frozenset(pairs))


def transitive_closure(rel: FinRelation) -> FinRelation:
    """Smallest transitive superset: every connected component becomes a clique."""
    return relation_from_partition(rel.n, rel.components())


def is_locally_transitive(rel: FinRelation, t: int) -> bool:
    """Transitivity of ``rel`` restricted to ``[0, t]``."""
    if not 0 <= t < rel.n:
        raise ValueError(f"t={t} out of range for universe of size {rel.n}")
    adj = [[] for _ in range(t + 1)]
    for u, v in rel.pairs:
        if v <= t:
            adj[u].append(v)
            adj[v].append(u)
    for v in range(t + 1):
        for u, w in combinations(adj[v], 2):
            if _norm(u, w) not in rel.pairs:
                return False
    return True


def is_equivalence(rel: FinRelation) -> bool:
    return rel.n == 0 or is_locally_transitive(rel, rel.n - 1)


def disjoint_sum(r: FinRelation, s: FinRelation) -> FinRelation:
    """``R`` on the evens, ``S`` on the odds."""
    n = 2 * max(r.n, s.n)
    pairs = {(2 * a, 2 * b) for a, b in r.pairs}
    pairs |= {(2 * a + 1, 2 * b + 1) for a, b in s.pairs}
    return FinRelation(n, frozenset(pairs))


def symmetric_fragment(p: PreorderTable) -> FinRelation:
    problems = p.check()
    if problems:
        raise ValueError("not a preorder: " + "; ".join(problems[:3]))
    m = p.leq & p.leq.T
    pairs = {(int(a), int(b)) for a, b in np.argwhere(np.triu(m, 1))}
    return FinRelation(p.n, frozenset(pairs))


@dataclass(frozen=True)
class ReductionMap:
    """A finite table ``x -> f(x)`` plus the window it was checked on."""

    table: Mapping[int, int]
    verified_window: int = 0

    def __call__(self, x: int) -> int:
        return self.table[x]

    def domain(self) -> range:
        return range(len(self.table))


@dataclass
class ReductionReport:
    window: int
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def __bool__(self) -> bool:
        return self.ok


Relation = Union[FinRelation, Callable[[int, int], bool]]


def _as_test(rel: Relation) -> Callable[[int, int], bool]:
    if isinstance(rel, FinRelation):
        return rel.related
    return rel


def verify_reduction(f, e: Relation, F: Relation, window: int,
                     ordered: bool = False) -> ReductionReport:
    """All pairs ``x, y < window`` with ``x E y`` disagreeing with ``f(x) F f(y)``.

    ``e`` and ``F`` may be ``FinRelation`` values or membership callables.
    With ``ordered=True`` both orders of each pair are checked (needed for
    preorders); otherwise pairs are unordered.
    """
    fx = {}
    for x in range(window):
        try:
            fx[x] = f(x) if callable(f) else f[x]
        except (KeyError, IndexError):
            raise ValueError(f"reduction undefined at {x}") from None
        if isinstance(F, FinRelation) and not 0 <= fx[x] < F.n:
            raise ValueError(f"f({x})={fx[x]} outside target universe of size {F.n}")
    lhs, rhs = _as_test(e), _as_test(F)
    report = ReductionReport(window)
    pairs = ((x, y) for x in range(window) for y in range(window) if x != y) if ordered \
        else combinations(range(window), 2)
    for x, y in pairs:
        a = bool(lhs(x, y))
        b = bool(rhs(fx[x], fx[y]))
        if a != b:
            report.counterexamples.append((x, y, a, b))
    return report


@dataclass(frozen=True)
class PartitionSchedule:
    """Refining partitions ``stages[0..T]`` of ``range(n)``, constant from ``stable_from``."""

    n: int
    stages: tuple
    stable_from: int

    def __post_init__(self):
        st = tuple(tuple(tuple(sorted(b)) for b in sorted(p, key=min)) for p in self.stages)
        object.__setattr__(self, "stages", st)

    @property
    def last(self) -> int:
        return len(self.stages) - 1

    @classmethod
    def constant(cls, n: int, blocks: Iterable[Sequence[int]], length: int = 1) -> "PartitionSchedule":
        p = tuple(tuple(b) for b in blocks)
        return cls(n, (p,) * length, 0)

    @classmethod
    def from_json(cls, data: dict) -> "PartitionSchedule":
        return cls(int(data["n"]), tuple(tuple(tuple(b) for b in p) for p in data["stages"]),
                   int(data["stable_from"]))

    def to_json(self) -> dict:
        return {"n": self.n, "stable_from": self.stable_from,
                "stages": [[list(b) for b in p] for p in self.stages]}

    def clamp(self, t: int) -> int:
        return min(t, self.last)

    def partition(self, t: int) -> tuple:
        return self.stages[self.clamp(t)]

    def limit(self) -> tuple:
        return self.stages[self.last]

    def limit_relation(self) -> FinRelation:
        return relation_from_partition(self.n, self.limit())

    def labels(self) -> np.ndarray:
        """``labels[t, x]`` = least element of the block of ``x`` at stage ``t``."""
        out = np.zeros((len(self.stages), self.n), dtype=np.int64)
        for t, p in enumerate(self.stages):
            for b in p:
                out[t, list(b)] = b[0]
        return out


def stage_relation(sched: PartitionSchedule, t: int) -> Callable[[int, int], bool]:
    """Membership test for ``E_t``: pairs leaving ``[0, t]`` are padded in."""
    block_of = {}
    for b in sched.partition(t):
        for x in b:
            block_of[x] = b[0]

    def member(u: int, v: int) -> bool:
        if u == v:
            return True
        if u > t or v > t:
            return True
        return block_of[u] == block_of[v]

    return member


@dataclass
class ScheduleReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _check_partition(n: int, p) -> list:
    seen = []
    for b in p:
        if list(b) != sorted(b):
            return ["block not sorted"]
        seen.extend(b)
    if sorted(seen) != list(range(n)):
        return ["blocks do not form a partition of [0,n)"]
    return []


def validate_schedule(sched: PartitionSchedule) -> ScheduleReport:
    rep = ScheduleReport()
    if not sched.stages:
        rep.violations.append((None, "no stages"))
        return rep
    if not 0 <= sched.stable_from <= sched.last:
        rep.violations.append((None, f"stable_from={sched.stable_from} outside [0,{sched.last}]"))
    for t, p in enumerate(sched.stages):
        for msg in _check_partition(sched.n, p):
            rep.violations.append((t, msg))
    if rep.violations:
        return rep
    for t in range(sched.last):
        coarse = {x: b[0] for b in sched.stages[t] for x in b}
        for b in sched.stages[t + 1]:
            if len({coarse[x] for x in b}) > 1:
                rep.violations.append((t + 1, f"block {list(b)} merges blocks of stage {t}"))
    lim = sched.stages[min(sched.stable_from, sched.last)] if sched.stages else ()
    for t in range(sched.stable_from + 1, len(sched.stages)):
        if sched.stages[t] != lim:
            rep.violations.append((t, f"partition changes after stable_from={sched.stable_from}"))
    return rep


def random_schedule(rng: random.Random, n: int, stages: int, split_p: float = 0.15) -> PartitionSchedule:
    """Refining schedule of ``stages + 1`` partitions starting from a random coarse one.

    At each later stage every block of size > 1 splits with probability
    ``split_p``; ``stable_from`` is the last stage that changed anything.
    """
    if n < 1 or stages < 0:
        raise ValueError("need n >= 1 and stages >= 0")
    blocks = {}
    for x in range(n):
        blocks.setdefault(rng.randrange(max(1, n // 2)), []).append(x)
    current = [sorted(b) for b in blocks.values()]
    out = [tuple(tuple(b) for b in current)]
    stable = 0
    for t in range(1, stages + 1):
        nxt = []
        for b in current:
            if len(b) > 1 and rng.random() < split_p:
                cut = set(rng.sample(b, rng.randint(1, len(b) - 1)))
                nxt.append([x for x in b if x in cut])
                nxt.append([x for x in b if x not in cut])
            else:
                nxt.append(b)
        if len(nxt) != len(current):
            stable = t
        current = nxt
        out.append(tuple(tuple(b) for b in current))
    return PartitionSchedule(n, tuple(out), stable)


def random_preorder(rng: random.Random, n: int, density: float = 0.3) -> PreorderTable:
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b and rng.random() < density]
    return PreorderTable.from_pairs(n, pairs)


def all_preorders(n: int):
    """Every preorder on ``range(n)`` exactly once (closures of all pair sets)."""
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    seen = set()
    for mask in range(1 << len(pairs)):
        P = PreorderTable.from_pairs(n, [p for k, p in enumerate(pairs) if mask >> k & 1])
        key = P.leq.tobytes()
        if key not in seen:
            seen.add(key)
            yield P
