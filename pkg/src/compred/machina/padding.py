"""Step-count padding and the curried machines built from it.

For a total binary machine ``g`` let ``h(n)`` be the number of steps ``g``
takes on ``(n, n)``.  Pads are ``p(y) = 1^y 0 1^h(y)``.  ``eval_G`` accepts a
pair of pads and otherwise answers 0; checking a candidate pad ``1^x 0 1^z``
runs ``g(x, x)`` for at most ``z`` steps.

``curry_index`` compiles ``v -> G(w, v)`` into one multitape machine whose
tape 0 holds ``v``, tapes ``1..k`` run the pad check and tapes ``k+1..2k``
run ``g(x, n)``.  The pad check uses the ``1^z`` block of ``v`` itself as
its clock.  It requires ``g`` in normal form: halting with the tape-0 head on
cell 0.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product

from ..pi1 import pair
from .machine import ClockedTM, MultiTapeTM, _execute, machine_code, value_of

__all__ = [
    "DEFAULT_STEP_CAP",
    "StepCapExceeded",
    "encode_pair",
    "step_count_h",
    "pad_p",
    "parse_pad",
    "GResult",
    "eval_G",
    "curried_machine",
    "curry_index",
    "CURRY_CLOCK",
    "fit_quadratic_constant",
]

DEFAULT_STEP_CAP = 10 ** 6
CURRY_CLOCK = 16
_PAD = re.compile(r"^(1*)0(1*)$")
_CH = "01_"


class StepCapExceeded(RuntimeError):
    def __init__(self, n: int, cap: int):
        super().__init__(f"g did not halt on ({n},{n}) within the step cap {cap}")
        self.n = n
        self.cap = cap


def encode_pair(x: int, n: int) -> str:
    return "1" * x + "0" + "1" * n


def step_count_h(g: MultiTapeTM, n: int, cap: int = DEFAULT_STEP_CAP) -> int:
    status, _, steps, _ = _execute(g, encode_pair(n, n), cap, None)
    if status != 0:
        raise StepCapExceeded(n, cap)
    return steps


def pad_p(g: MultiTapeTM, y: int, cap: int = DEFAULT_STEP_CAP) -> str:
    return encode_pair(y, step_count_h(g, y, cap))


def parse_pad(s: str):
    """``(x, z)`` if ``s = 1^x 0 1^z``, else ``None``."""
    m = _PAD.match(s)
    if m is None:
        return None
    return len(m.group(1)), len(m.group(2))


def _pad_ok(g: MultiTapeTM, x: int, z: int) -> tuple:
    """Does ``g(x, x)`` halt in exactly ``z`` steps?  Never runs past ``z``."""
    status, _, steps, _ = _execute(g, encode_pair(x, x), z, None)
    return status == 0 and steps == z, steps


@dataclass(frozen=True)
class GResult:
    value: int
    steps: int
    well_formed: bool


def eval_G(g: MultiTapeTM, a: str, b: str) -> GResult:
    """Reference evaluation of ``G(a, b)``.

    ``steps`` counts one step per input symbol read while parsing, the steps
    spent checking both pads, the steps of ``g(x, n)`` and one step per output
    symbol copied.
    """
    steps = len(a) + len(b)
    pa, pb = parse_pad(a), parse_pad(b)
    if pa is None or pb is None:
        return GResult(0, steps, False)
    (x, za), (n, zb) = pa, pb
    ok, used = _pad_ok(g, x, za)
    steps += used
    if not ok:
        return GResult(0, steps, False)
    ok, used = _pad_ok(g, n, zb)
    steps += used
    if not ok:
        return GResult(0, steps, False)
    status, out, used, _ = _execute(g, encode_pair(x, n), za + zb, None)
    steps += used
    if status != 0:
        return GResult(0, steps, True)
    steps += len(out) + 1
    return GResult(value_of(out), steps, True)


def _g_rows(g: MultiTapeTM):
    """Defined transitions of ``g`` as ``(state, read, next, write, move)`` symbol tuples."""
    c = g.table
    names = {v: s for s, v in c["index"].items()}
    k = g.tapes
    out = []
    for s, q in c["index"].items():
        if g.halting and s in g.halting:
            continue
        for syms in product(range(3), repeat=k):
            row = q * g.width + sum(sym * 3 ** i for i, sym in enumerate(syms))
            ns = int(c["next_state"][row])
            if ns < 0:
                continue
            out.append((s, syms, names[ns], tuple(int(v) for v in c["write"][row]),
                        tuple(int(v) for v in c["move"][row])))
    return out


def _mv(d: int) -> str:
    return {-1: "L", 0: "S", 1: "R"}[d]


def _constant_zero(tapes: int) -> MultiTapeTM:
    return MultiTapeTM(tapes, ("z", "h"), "z", {"h"},
                       [("z", "*" * tapes, "h", "_" + "*" * (tapes - 1), "S" * tapes)],
                       name="const-zero")


def curried_machine(g: MultiTapeTM, w: str) -> MultiTapeTM:
    """Machine computing ``v -> G(w, v)`` (unclocked)."""
    if g.oracle is not None:
        raise ValueError("curried machines need an oracle-free g")
    k = g.tapes
    K = 1 + 2 * k
    pw = parse_pad(w)
    if pw is None or not _pad_ok(g, *pw)[0]:
        return _constant_zero(K)
    x = pw[0]
    C0, D0 = 1, 1 + k
    trans = []
    states = []

    def add(state, read: dict, nxt, write: dict = None, move: dict = None):
        r = ["*"] * K
        wr = ["*"] * K
        mv = ["S"] * K
        for t, sym in read.items():
            r[t] = sym
        for t, sym in (write or {}).items():
            wr[t] = sym
        for t, d in (move or {}).items():
            mv[t] = d
        trans.append((state, "".join(r), nxt, "".join(wr), "".join(mv)))

    # hardwired prefix 1^x 0 on the compute copy
    for i in range(x + 1):
        st = f"pre{i}"
        states.append(st)
        add(st, {}, f"pre{i + 1}" if i < x else "scan", {D0: "1" if i < x else "0"}, {D0: "R"})
    states += ["scan", "back", "fwd", "rwC", "rwC1", "rwD", "rwD1"]
    # copy 1^n onto both copies; the separator goes only on the check copy
    add("scan", {0: "1"}, "scan", {C0: "1", D0: "1"}, {0: "R", C0: "R", D0: "R"})
    add("scan", {0: "0"}, "back", {C0: "0"}, {C0: "R"})
    add("scan", {0: "_"}, "rej")
    # rewind the input and copy 1^n a second time onto the check copy
    add("back", {0: "0"}, "back", move={0: "L"})
    add("back", {0: "1"}, "back", move={0: "L"})
    add("back", {0: "_"}, "fwd", move={0: "R"})
    add("fwd", {0: "1"}, "fwd", {C0: "1"}, {0: "R", C0: "R"})
    add("fwd", {0: "0"}, "rwC", move={0: "R"})
    # both copies hold non-blank cells 0.. and a blank at cell -1
    add("rwC", {}, "rwC1", move={C0: "L"})
    for s in "01":
        add("rwC1", {C0: s}, "rwC1", move={C0: "L"})
    add("rwC1", {C0: "_"}, "rwD", move={C0: "R"})
    add("rwD", {}, "rwD1", move={D0: "L"})
    for s in "01":
        add("rwD1", {D0: s}, "rwD1", move={D0: "L"})
    add("rwD1", {D0: "_"}, f"C:{g.start}", move={D0: "R"})

    rows = _g_rows(g)
    defined = {(s, r) for s, r, *_ in rows}
    # clocked check of g(n, n) on tapes 1..k: one step per 1 of the z block
    for s, r, ns, wr, mv in rows:
        read = {C0 + t: _CH[r[t]] for t in range(k)}
        add(f"C:{s}", {0: "1", **read}, f"C:{ns}",
            {C0 + t: _CH[wr[t]] for t in range(k)},
            {0: "R", **{C0 + t: _mv(mv[t]) for t in range(k)}})
        for bad in "0_":
            add(f"C:{s}", {0: bad, **read}, "rej")
    for s in g.states:
        for r in product(range(3), repeat=k):
            if (s, r) in defined:
                continue
            read = {C0 + t: _CH[r[t]] for t in range(k)}
            add(f"C:{s}", {0: "_", **read}, f"D:{g.start}")
            for bad in "01":
                add(f"C:{s}", {0: bad, **read}, "rej")
    # unclocked g(x, n) on tapes k+1..2k
    for s, r, ns, wr, mv in rows:
        read = {D0 + t: _CH[r[t]] for t in range(k)}
        add(f"D:{s}", read, f"D:{ns}", {D0 + t: _CH[wr[t]] for t in range(k)},
            {D0 + t: _mv(mv[t]) for t in range(k)})
    for s in g.states:
        for r in product(range(3), repeat=k):
            if (s, r) not in defined:
                add(f"D:{s}", {D0 + t: _CH[r[t]] for t in range(k)}, "out")
    states += [f"C:{s}" for s in g.states] + [f"D:{s}" for s in g.states]
    # copy the answer over the input: step back onto the input, rewind, copy, terminate
    states += ["out", "outrw", "copy", "rej", "rejrw", "rejclr", "h"]
    add("out", {}, "outrw", move={0: "L"})
    for s in "01":
        add("outrw", {0: s}, "outrw", move={0: "L"})
    add("outrw", {0: "_"}, "copy", move={0: "R"})
    for s in "01":
        add("copy", {D0: s}, "copy", {0: s}, {0: "R", D0: "R"})
    add("copy", {D0: "_"}, "h", {0: "_"})
    add("rej", {}, "rejrw", move={0: "L"})
    for s in "01":
        add("rejrw", {0: s}, "rejrw", move={0: "L"})
    add("rejrw", {0: "_"}, "rejclr", move={0: "R"})
    add("rejclr", {}, "h", {0: "_"})
    return MultiTapeTM(K, tuple(states), "pre0", {"h"}, trans, name=f"curry[{g.name}]")


def curry_index(g: MultiTapeTM, w: str, c: int = CURRY_CLOCK) -> ClockedTM:
    """Clocked machine for ``G(w, .)`` with quadratic budget in ``|v| + |w|``.

    Its index ``pair(code(g), int('1' + w, 2))`` is injective in ``w``.
    """
    base = curried_machine(g, w)
    return ClockedTM(base, c, "quadratic", offset=len(w), index=pair(machine_code(g), int("1" + w, 2)))


def fit_quadratic_constant(samples) -> float:
    """Smallest ``c`` with ``steps <= c * size**2`` on every ``(size, steps)`` sample."""
    best = 0.0
    for size, steps in samples:
        if size <= 0:
            continue
        best = max(best, steps / (size * size))
    return best
