"""Binary-function presentations of co-r.e. equivalence relations.

``build_f`` turns a partition schedule into a table ``f`` with
``x E y  <=>  f_x == f_y``; ``UniversalG`` glues a family of such tables
along Cantor codes; ``diagonal_L`` is the finite diagonal gadget that defeats
one candidate reduction into a given limit relation.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from typing import Mapping, Optional, Sequence

import numpy as np

from . import _kernels
from .relcore import PartitionSchedule

__all__ = [
    "pair",
    "unpair",
    "BinaryFunctionTable",
    "DeltaTwoApprox",
    "build_f",
    "f_table",
    "rows_decide",
    "decide_window",
    "UniversalG",
    "universal_g",
    "approx_Fn",
    "diagonal_L",
    "diagonal_witness",
    "diagonal_L_machine",
]


def pair(i: int, x: int) -> int:
    s = i + x
    return s * (s + 1) // 2 + x


def unpair(z: int) -> tuple:
    if z < 0:
        raise ValueError("unpair expects a natural number")
    w = (isqrt(8 * z + 1) - 1) // 2
    x = z - w * (w + 1) // 2
    return w - x, x


@dataclass(frozen=True)
class BinaryFunctionTable:
    """``values[x, n]`` over the rectangle ``[0, N) x [0, H)``."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def horizon(self) -> int:
        return self.values.shape[1]

    def row(self, x: int) -> np.ndarray:
        return self.values[x]

    def __call__(self, x: int, n: int) -> int:
        return int(self.values[x, n])


def decide_window(sched: PartitionSchedule) -> int:
    """Smallest window at which ``rows_decide`` is guaranteed exact."""
    return max(sched.stable_from, sched.n)


def f_table(sched: PartitionSchedule, horizon: int) -> BinaryFunctionTable:
    """Whole table of ``build_f`` for ``x < N`` and ``n < horizon``."""
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    vals = _kernels.f_table(sched.labels(), horizon)
    vals.setflags(write=False)
    return BinaryFunctionTable(vals)


def build_f(sched: PartitionSchedule, x: int, n: int, table: Optional[BinaryFunctionTable] = None) -> int:
    if not 0 <= x < sched.n:
        raise ValueError(f"x={x} outside universe of size {sched.n}")
    if n < 0:
        raise ValueError("n must be non-negative")
    if table is None or n >= table.horizon:
        table = f_table(sched, n + 1)
    return table(x, n)


def rows_decide(sched: PartitionSchedule, x: int, y: int, window: int,
                table: Optional[BinaryFunctionTable] = None) -> bool:
    """Compare rows ``x`` and ``y`` on columns ``0..window`` (inclusive)."""
    need = decide_window(sched)
    if window < need:
        raise ValueError(f"window {window} below the exactness bound {need}")
    if table is None or table.horizon < window + 1:
        table = f_table(sched, window + 1)
    return bool(np.array_equal(table.values[x, : window + 1], table.values[y, : window + 1]))


def approx_Fn(table: BinaryFunctionTable, n: int, x: int, y: int) -> bool:
    if n > table.horizon:
        raise ValueError(f"n={n} exceeds horizon {table.horizon}")
    return bool(np.array_equal(table.values[x, :n], table.values[y, :n]))


class UniversalG:
    """``g(<i,x>, n) = f^i(x, n)`` over a finite family of schedules.

    Codes whose family index is out of range, or whose ``x`` lies outside that
    member's universe, go to the sink ``pair(i, Nmax + 1)``: one value per
    ``i``, above every genuine row value.
    """

    def __init__(self, family: Sequence[PartitionSchedule], horizon: Optional[int] = None):
        self.family = tuple(family)
        self.nmax = max((s.n for s in self.family), default=0)
        self.window = max((decide_window(s) for s in self.family), default=0)
        self.horizon = self.window + 1 if horizon is None else horizon
        self.tables = [f_table(s, self.horizon) for s in self.family]

    def sink(self, i: int) -> int:
        return pair(i, self.nmax + 1)

    def row(self, code: int) -> np.ndarray:
        i, x = unpair(code)
        if i < len(self.family) and x < self.family[i].n:
            return self.tables[i].values[x]
        return np.full(self.horizon, self.sink(i), dtype=np.int64)

    def __call__(self, code: int, n: int) -> int:
        if n >= self.horizon:
            raise ValueError(f"n={n} beyond horizon {self.horizon}")
        return int(self.row(code)[n])

    def related(self, a: int, b: int) -> bool:
        """``E_g`` on codes, decided by comparing rows on the exactness window."""
        w = self.window + 1
        return bool(np.array_equal(self.row(a)[:w], self.row(b)[:w]))


def universal_g(family: Sequence[PartitionSchedule], code: int, n: int) -> int:
    return UniversalG(family, horizon=max(n + 1, 1))(code, n)


@dataclass(frozen=True)
class DeltaTwoApprox:
    """``bits[x, y, t]`` in ``{0, 1}``; ``x E y`` iff the bit is 1 for every ``t``."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=np.int8)
        if b.ndim != 3 or b.shape[0] != b.shape[1]:
            raise ValueError("bits must have shape (M, M, T)")
        object.__setattr__(self, "bits", b)

    @property
    def size(self) -> int:
        return self.bits.shape[0]

    @property
    def stages(self) -> int:
        return self.bits.shape[2]

    def __call__(self, x: int, y: int, t: int) -> int:
        return int(self.bits[x, y, t])


def diagonal_witness(f: DeltaTwoApprox, phi: Mapping[int, int], e: int, max_stage: int):
    """Least ``t <= max_stage`` giving the first-case witness, as ``(t, x, y, z)``."""
    x = phi.get(pair(e, 0))
    y = phi.get(pair(e, 1))
    if x is None or y is None:
        return None
    last = min(max_stage, f.stages - 1)
    for t in range(last + 1):
        z = phi.get(pair(e, t + 2))
        if z is None:
            continue
        if f(x, y, t) == 0:
            return t, x, y, z
    return None


def diagonal_L(f: DeltaTwoApprox, phi: Mapping[int, int], e: int, max_stage: int) -> set:
    """Pairs of column ``e`` placed into ``L``: at most one, else the empty set."""
    w = diagonal_witness(f, phi, e, max_stage)
    if w is None:
        return set()
    t, x, y, z = w
    for v in range(f.stages):
        # first bullet wins ties
        if f(x, z, v) == 0:
            return {(pair(e, 0), pair(e, t + 2))}
        if f(y, z, v) == 0:
            return {(pair(e, 1), pair(e, t + 2))}
    return set()


def diagonal_L_machine(f: DeltaTwoApprox, machine, e: int, max_stage: int, budget: int) -> set:
    """``diagonal_L`` with ``phi`` evaluated by running ``machine`` under ``budget`` steps."""
    from .machina.machine import run

    phi = {}
    for s in range(max_stage + 3):
        code = pair(e, s)
        out, _ = run(machine, "1" * code, budget)
        # values outside the approximation box count as undefined
        if out is not None and out.count("1") < f.size:
            phi[code] = out.count("1")
    return diagonal_L(f, phi, e, max_stage)
