"""Stagewise enumeration constructions over finite feeds.

Feeds replace the r.e. inputs: an ``REFeed`` lists ``(element, stage)``
enumerations up to a horizon and a ``SegmentFeed`` lists, per column ``k``,
the length of an initial segment of the naturals at each stage.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .machina.machine import ClockedTM, MultiTapeTM
from .machina.padding import DEFAULT_STEP_CAP, step_count_h
from .pi1 import unpair

__all__ = [
    "REFeed",
    "SegmentFeed",
    "Splitting",
    "EceReport",
    "CapExceeded",
    "linear_Lx_member",
    "Lx_tail",
    "supersparse_f",
    "supersparse_A_member",
    "split_g",
    "run_splitting",
    "settling_check",
    "ece_window",
]


@dataclass(frozen=True)
class REFeed:
    events: tuple
    horizon: int

    def __post_init__(self):
        ev = tuple((int(a), int(s)) for a, s in self.events)
        stages = [s for _, s in ev]
        if stages != sorted(stages):
            raise ValueError("feed stages must be nondecreasing in list order")
        elems = [a for a, _ in ev]
        if len(set(elems)) != len(elems):
            raise ValueError("feed enumerates an element twice")
        if any(s < 0 or s > self.horizon for s in stages):
            raise ValueError(f"feed stage outside [0, {self.horizon}]")
        if any(a < 0 for a in elems):
            raise ValueError("feed elements must be natural numbers")
        object.__setattr__(self, "events", ev)
        object.__setattr__(self, "_stages", tuple(stages))
        object.__setattr__(self, "_changed", frozenset(stages))

    @classmethod
    def from_json(cls, data: Mapping, horizon: Optional[int] = None) -> "REFeed":
        ev = [tuple(e) for e in data["events"]]
        h = data.get("horizon", horizon)
        if h is None:
            h = max((s for _, s in ev), default=0)
        return cls(tuple(ev), int(h))

    def to_json(self) -> dict:
        return {"events": [list(e) for e in self.events], "horizon": self.horizon}

    def changed_at(self, t: int) -> bool:
        return t in self._changed

    def upto(self, s: int) -> frozenset:
        """Elements enumerated at stages ``<= s``."""
        return frozenset(a for a, _ in self.events[: bisect_right(self._stages, s)])

    def stage_of(self, a: int) -> Optional[int]:
        for e, s in self.events:
            if e == a:
                return s
        return None


@dataclass(frozen=True)
class SegmentFeed:
    """``lengths[k][s]`` = length of the column-``k`` initial segment at stage ``s``.

    Columns not listed are empty at every stage; a column's last listed
    length persists up to ``horizon``.
    """

    lengths: Mapping
    horizon: int

    def __post_init__(self):
        cols = {int(k): tuple(int(v) for v in seq) for k, seq in self.lengths.items()}
        for k, seq in cols.items():
            if any(b < a for a, b in zip(seq, seq[1:])):
                raise ValueError(f"segment column {k} is not monotone")
            if any(v < 0 for v in seq):
                raise ValueError(f"segment column {k} has a negative length")
        object.__setattr__(self, "lengths", cols)

    @classmethod
    def from_json(cls, data: Mapping, horizon: Optional[int] = None) -> "SegmentFeed":
        segs = data["segments"]
        h = data.get("horizon", horizon)
        if h is None:
            h = max((len(v) - 1 for v in segs.values()), default=0)
        return cls({int(k): v for k, v in segs.items()}, int(h))

    def to_json(self) -> dict:
        return {"segments": {str(k): list(v) for k, v in sorted(self.lengths.items())},
                "horizon": self.horizon}

    def length(self, k: int, s: int) -> int:
        seq = self.lengths.get(k)
        if not seq:
            return 0
        return seq[min(s, len(seq) - 1)]

    def columns(self) -> list:
        return sorted(self.lengths)


def linear_Lx_member(S: REFeed, T: REFeed, w: str) -> bool:
    """Stage-``|w|`` rule: the most recent change among stages ``1..|w|`` decides."""
    n = len(w)
    for t in range(n, 0, -1):
        a, b = S.changed_at(t), T.changed_at(t)
        if a or b:
            return a
    return True


def Lx_tail(S: REFeed, T: REFeed, horizon: int) -> list:
    """Membership bit of each length ``0..horizon`` (one string per length suffices)."""
    return [linear_Lx_member(S, T, "0" * n) for n in range(horizon + 1)]


class CapExceeded(RuntimeError):
    def __init__(self, n: int, cap: int):
        super().__init__(f"iterate f({n}) exceeds the cap {cap}")
        self.n = n
        self.cap = cap


def supersparse_f(h_machine: MultiTapeTM, n: int, cap: int = 10 ** 5,
                  step_cap: int = DEFAULT_STEP_CAP) -> int:
    """``f(0) = 0``, ``f(k + 1) = h(f(k))`` with ``h`` the step count of ``h_machine``."""
    return _f_values(h_machine, n, cap, step_cap)[n]


def _f_values(h_machine: MultiTapeTM, n: int, cap: int, step_cap: int) -> list:
    vals = [0]
    for k in range(n):
        cur = vals[-1]
        nxt = step_count_h(h_machine, cur, step_cap)
        if nxt < cur + 1:
            raise ValueError(f"h({cur}) = {nxt} violates h(m) >= m + 1")
        if nxt > cap:
            raise CapExceeded(k + 1, cap)
        vals.append(nxt)
    return vals


def supersparse_A_member(h_machine: MultiTapeTM, adversaries: Sequence[ClockedTM], w: str,
                         cap: int = 10 ** 5, step_cap: int = DEFAULT_STEP_CAP) -> bool:
    """``0^f(k)`` is in ``A`` iff adversary ``k mod len`` rejects it under its clock."""
    if any(c != "0" for c in w):
        raise ValueError("supersparse words are over the alphabet {0}")
    if not adversaries:
        raise ValueError("at least one adversary is required")
    m = len(w)
    vals = [0]
    k = 0
    while vals[-1] < m:
        nxt = step_count_h(h_machine, vals[-1], step_cap)
        if nxt < vals[-1] + 1:
            raise ValueError(f"h({vals[-1]}) = {nxt} violates h(m) >= m + 1")
        if nxt > cap:
            raise CapExceeded(len(vals), cap)
        vals.append(nxt)
    if vals[-1] != m:
        return False
    k = len(vals) - 1
    accept = adversaries[k % len(adversaries)].value(w) != 0
    return not accept


def split_g(P: SegmentFeed, k: int, s: int) -> int:
    """Greatest ``t <= s`` with ``t = 0`` or a change of column ``k`` at ``t``."""
    if s > P.horizon:
        raise ValueError(f"stage {s} beyond horizon {P.horizon}")
    for t in range(s, 0, -1):
        if P.length(k, t - 1) != P.length(k, t):
            return t
    return 0


@dataclass
class Splitting:
    E_part: dict = field(default_factory=dict)
    F_part: dict = field(default_factory=dict)

    def at(self, s: int) -> tuple:
        return ({a for a, t in self.E_part.items() if t <= s},
                {a for a, t in self.F_part.items() if t <= s})


def _g_table(P: SegmentFeed, kmax: int, horizon: int) -> list:
    """``g[k][s]`` for ``k <= kmax`` by one forward pass per column."""
    out = []
    for k in range(kmax + 1):
        row = [0] * (horizon + 1)
        last = 0
        for s in range(1, horizon + 1):
            if P.length(k, s - 1) != P.length(k, s):
                last = s
            row[s] = last
        out.append(row)
    return out


def run_splitting(A: REFeed, P: SegmentFeed) -> Splitting:
    """Each new element goes to ``F`` if the least column ``k <= s`` with
    ``a < g(k, s)`` is even, to ``E`` if it is odd or there is none."""
    horizon = max(A.horizon, P.horizon)
    cols = P.columns()
    kmax = max(cols) if cols else -1
    g = _g_table(P, kmax, horizon)
    out = Splitting()
    for a, s in A.events:
        k = next((k for k in range(min(s, kmax) + 1) if a < g[k][s]), None)
        if k is not None and k % 2 == 0:
            out.F_part[a] = s
        else:
            out.E_part[a] = s
    return out


def settling_check(A: REFeed, P: SegmentFeed, k: int) -> dict:
    """Replay check that the part selected by column ``k`` settles above ``r``.

    ``k`` is the designated unbounded column.  ``r`` is the largest final
    ``g(i, .)`` over ``i < k``.  For each ``v >= r`` with a first stage
    ``s_v >= k`` where ``g(k, s_v) > v``, the part (``E`` for even ``k``, ``F``
    for odd) is compared at ``s_v`` and at the horizon.
    """
    horizon = max(A.horizon, P.horizon)
    g = _g_table(P, max(k, max(P.columns(), default=0)), horizon)
    r = max((g[i][horizon] for i in range(k)), default=0)
    split = run_splitting(A, P)
    part = split.E_part if k % 2 == 0 else split.F_part
    final = set(part)
    checked, mismatches = 0, []
    top = g[k][horizon]
    for v in range(r, top):
        s_v = next((s for s in range(k, horizon + 1) if g[k][s] > v), None)
        if s_v is None:
            continue
        early = {a for a, t in part.items() if t <= s_v}
        checked += 1
        if (v in early) != (v in final):
            mismatches.append(v)
    return {"column": k, "r": r, "checked": checked, "mismatches": mismatches}


@dataclass(frozen=True)
class EceReport:
    kind: str
    horizon: int
    label: str
    no_difference_seen: bool
    data: dict


def ece_window(Wi: REFeed, Wj: REFeed, kind: str, horizon: int) -> EceReport:
    """Finite-horizon view of the four almost-equality relations on enumerations."""
    a, b = Wi.upto(horizon), Wj.upto(horizon)
    diff = sorted(a ^ b)
    label = "approximation at horizon"
    if kind == "E0":
        data = {"size": len(diff), "difference": diff}
        return EceReport(kind, horizon, label, not diff, data)
    if kind == "E1":
        cols = sorted({unpair(z)[0] for z in diff})
        return EceReport(kind, horizon, label, not cols, {"columns": cols})
    if kind == "E2":
        total = sum((Fraction(1, z) for z in diff if z >= 1), Fraction(0))
        return EceReport(kind, horizon, label, total == 0, {"partial_sum": total})
    if kind == "E3":
        sizes = {}
        for z in diff:
            n = unpair(z)[0]
            sizes[n] = sizes.get(n, 0) + 1
        return EceReport(kind, horizon, label, not sizes, {"column_sizes": dict(sorted(sizes.items()))})
    raise ValueError(f"unknown kind {kind!r}; expected E0, E1, E2 or E3")
