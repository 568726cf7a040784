"""Deterministic multitape Turing machines over {0, 1, blank}.

A machine is described by named states and a transition list.  Each
transition reads one pattern symbol per tape (``0``, ``1``, ``_`` for blank,
``*`` for any), writes one symbol per tape (``*`` keeps what was read) and
moves each head ``L``, ``R`` or ``S``.  The description is compiled to dense
numpy tables indexed by ``state * 3**k + sum(sym_t * 3**t)``.

Tapes are two-way infinite.  The input is written on tape 0 from cell 0; the
output is tape 0 from cell 0 up to the first blank.  A machine halts in a
halting state or when no transition applies.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .. import _kernels

__all__ = [
    "BLANK",
    "MalformedMachine",
    "OracleSpec",
    "MultiTapeTM",
    "OracleRun",
    "ClockedTM",
    "run",
    "run_with_oracle",
    "run_trace",
    "value_of",
    "machine_code",
]

BLANK = 2
_SYM = {"0": 0, "1": 1, "_": BLANK}
_CHR = "01_"
_MOVE = {"L": -1, "R": 1, "S": 0}


class MalformedMachine(ValueError):
    pass


@dataclass(frozen=True)
class OracleSpec:
    """Query state ``query`` asks whether the oracle holds position ``|1^p|``
    read from tape ``tape`` (the run of 1s starting at cell 0), then moves to
    ``yes`` or ``no``.  Each query costs one step."""

    query: str
    yes: str
    no: str
    tape: int = 1


@dataclass(frozen=True)
class MultiTapeTM:
    tapes: int
    states: tuple
    start: str
    halting: frozenset
    transitions: tuple
    oracle: Optional[OracleSpec] = None
    name: str = ""
    _compiled: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "halting", frozenset(self.halting))
        object.__setattr__(self, "transitions", tuple(tuple(t) for t in self.transitions))
        object.__setattr__(self, "_compiled", _compile(self))

    @classmethod
    def from_json(cls, data: dict) -> "MultiTapeTM":
        try:
            oracle = data.get("oracle")
            return cls(
                tapes=int(data["tapes"]),
                states=tuple(data["states"]),
                start=data["start"],
                halting=frozenset(data.get("halting", ())),
                transitions=tuple(tuple(t) for t in data["transitions"]),
                oracle=OracleSpec(**oracle) if oracle else None,
                name=data.get("name", ""),
            )
        except (KeyError, TypeError) as exc:
            raise MalformedMachine(f"bad machine description: {exc}") from None

    def to_json(self) -> dict:
        out = {
            "tapes": self.tapes,
            "states": list(self.states),
            "start": self.start,
            "halting": sorted(self.halting),
            "transitions": [list(t) for t in self.transitions],
        }
        if self.oracle is not None:
            o = self.oracle
            out["oracle"] = {"query": o.query, "yes": o.yes, "no": o.no, "tape": o.tape}
        if self.name:
            out["name"] = self.name
        return out

    @property
    def width(self) -> int:
        return 3 ** self.tapes

    @property
    def table(self) -> dict:
        return self._compiled

    def index_of(self, state: str) -> int:
        return self._compiled["index"][state]


def machine_code(m: MultiTapeTM) -> int:
    """Injective integer code of a machine description (canonical JSON bytes)."""
    blob = json.dumps(m.to_json(), sort_keys=True, separators=(",", ":")).encode()
    return int.from_bytes(b"\x01" + blob, "big")


def machine_digest(m: MultiTapeTM) -> str:
    blob = json.dumps(m.to_json(), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _expand(pattern: str, k: int, what: str):
    if len(pattern) != k:
        raise MalformedMachine(f"{what} pattern {pattern!r} has length {len(pattern)}, expected {k}")
    opts = []
    for ch in pattern:
        if ch == "*":
            opts.append((0, 1, BLANK))
        elif ch in _SYM:
            opts.append((_SYM[ch],))
        else:
            raise MalformedMachine(f"bad symbol {ch!r} in {what} pattern {pattern!r}")
    return product(*opts)


def _compile(m: MultiTapeTM) -> dict:
    k = m.tapes
    if k < 1:
        raise MalformedMachine("a machine needs at least one tape")
    index = {}
    for s in m.states:
        if s in index:
            raise MalformedMachine(f"duplicate state {s!r}")
        index[s] = len(index)
    for s in (m.start, *m.halting):
        if s not in index:
            raise MalformedMachine(f"unknown state {s!r}")
    width = 3 ** k
    rows = len(index) * width
    next_state = np.full(rows, -1, dtype=np.int64)
    write = np.zeros((rows, k), dtype=np.int8)
    move = np.zeros((rows, k), dtype=np.int8)
    halting = np.zeros(len(index), dtype=np.bool_)
    for s in m.halting:
        halting[index[s]] = True
    qstate = ystate = nstate = -1
    qtape = 0
    if m.oracle is not None:
        o = m.oracle
        for s in (o.query, o.yes, o.no):
            if s not in index:
                raise MalformedMachine(f"unknown oracle state {s!r}")
        if not 1 <= o.tape < k:
            raise MalformedMachine("the query tape must be a work tape (index >= 1)")
        qstate, ystate, nstate, qtape = index[o.query], index[o.yes], index[o.no], o.tape
    for t in m.transitions:
        if len(t) != 5:
            raise MalformedMachine(f"transition {t!r} must have 5 fields")
        state, read, nxt, wr, mv = t
        if state not in index or nxt not in index:
            raise MalformedMachine(f"transition {t!r} names an unknown state")
        if state in m.halting or index[state] == qstate:
            raise MalformedMachine(f"transition {t!r} leaves a halting or query state")
        if len(wr) != k or len(mv) != k or any(c not in _MOVE for c in mv):
            raise MalformedMachine(f"transition {t!r} has a bad write/move field")
        if any(c not in "01_*" for c in wr):
            raise MalformedMachine(f"transition {t!r} writes an unknown symbol")
        base = index[state] * width
        for syms in _expand(read, k, "read"):
            row = base + sum(sym * 3 ** i for i, sym in enumerate(syms))
            if next_state[row] >= 0:
                raise MalformedMachine(
                    f"nondeterministic: state {state!r} reading {''.join(_CHR[c] for c in syms)!r}")
            next_state[row] = index[nxt]
            for i in range(k):
                write[row, i] = syms[i] if wr[i] == "*" else _SYM[wr[i]]
                move[row, i] = _MOVE[mv[i]]
    return {
        "index": index,
        "next_state": next_state,
        "write": write,
        "move": move,
        "halting": halting,
        "qstate": qstate,
        "ystate": ystate,
        "nstate": nstate,
        "qtape": qtape,
    }


@dataclass(frozen=True)
class OracleRun:
    status: str  # "halt", "timeout" or "diverge"
    output: Optional[str]
    steps: int
    use: int

    @property
    def converged(self) -> bool:
        return self.status == "halt"

    @property
    def value(self) -> Optional[int]:
        return None if self.output is None else value_of(self.output)


def value_of(output: str) -> int:
    """Natural-number reading of an output word: its count of 1s."""
    return output.count("1")


def _execute(m: MultiTapeTM, inp: str, budget: int, oracle):
    if budget < 0:
        raise ValueError("budget must be non-negative")
    if any(c not in "01" for c in inp):
        raise ValueError(f"input {inp!r} is not a bit string")
    c = m.table
    k = m.tapes
    origin = budget + 2
    length = 2 * budget + len(inp) + 4
    tapes = np.full((k, length), BLANK, dtype=np.int8)
    if inp:
        tapes[0, origin:origin + len(inp)] = np.frombuffer(inp.encode(), dtype=np.uint8) - 48
    heads = np.full(k, origin, dtype=np.int64)
    orc = np.asarray(oracle, dtype=np.int8) if oracle is not None else np.zeros(0, dtype=np.int8)
    status, steps, use, _ = _kernels.tm_loop(
        c["next_state"], c["write"], c["move"], c["halting"], k, m.width,
        c["index"][m.start], tapes, heads, budget, orc, len(orc),
        c["qstate"], c["ystate"], c["nstate"], c["qtape"], origin)
    output = None
    if status == _kernels.HALT:
        row = tapes[0, origin:]
        blanks = np.nonzero(row == BLANK)[0]
        end = int(blanks[0]) if len(blanks) else len(row)
        output = (row[:end] + 48).astype(np.uint8).tobytes().decode()
    return int(status), output, int(steps), int(use)


def run(m: MultiTapeTM, inp: str, budget: int):
    """``(output, steps)``; ``output`` is ``None`` on timeout."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    status, out, steps, _ = _execute(m, inp, budget, None)
    return out, steps


_STATUS = {_kernels.HALT: "halt", _kernels.TIMEOUT: "timeout", _kernels.DIVERGE: "diverge"}


def run_with_oracle(m: MultiTapeTM, inp: str, oracle: Sequence[int], budget: int) -> OracleRun:
    """Queries past ``len(oracle)`` end the run as a divergence."""
    status, out, steps, use = _execute(m, inp, budget, oracle)
    return OracleRun(_STATUS[status], out, steps, use)


def run_trace(m: MultiTapeTM, inp: str, budget: int, oracle: Sequence[int] = ()) -> list:
    """Full configuration trace (pure Python, for determinism checks and debugging)."""
    c = m.table
    names = {v: s for s, v in c["index"].items()}
    k = m.tapes
    cells = [dict() for _ in range(k)]
    for i, ch in enumerate(inp):
        cells[0][i] = _SYM[ch]
    heads = [0] * k
    state = c["index"][m.start]
    trace = []
    steps = 0
    while steps <= budget:
        trace.append((names[state], tuple(heads), tuple(tuple(sorted(t.items())) for t in cells)))
        if c["halting"][state]:
            break
        if state == c["qstate"]:
            if steps >= budget:
                break
            pos = 0
            while cells[c["qtape"]].get(pos, BLANK) == 1:
                pos += 1
            if pos >= len(oracle):
                break
            state = c["ystate"] if oracle[pos] else c["nstate"]
            steps += 1
            continue
        row = state * m.width + sum(cells[t].get(heads[t], BLANK) * 3 ** t for t in range(k))
        ns = int(c["next_state"][row])
        if ns < 0 or steps >= budget:
            break
        for t in range(k):
            cells[t][heads[t]] = int(c["write"][row, t])
            heads[t] += int(c["move"][row, t])
        state = ns
        steps += 1
    return trace


_TAGS = ("const", "linear", "quadratic")


@dataclass(frozen=True)
class ClockedTM:
    """``base`` cut off after ``c * h(n) + c`` steps, ``n`` the input length.

    ``tag`` is ``const``, ``linear``, ``quadratic`` or ``poly:d``; ``offset``
    is added to ``n`` before applying ``h``.  A cut-off run outputs 0.
    """

    base: MultiTapeTM
    c: int
    tag: str = "quadratic"
    offset: int = 0
    index: Optional[int] = None

    def __post_init__(self):
        if self.c < 1:
            raise ValueError("clock constant must be >= 1")
        if self.tag not in _TAGS and not (self.tag.startswith("poly:") and self.tag[5:].isdigit()):
            raise ValueError(f"unknown clock tag {self.tag!r}")

    def h(self, n: int) -> int:
        m = n + self.offset
        if self.tag == "const":
            return 1
        if self.tag == "linear":
            return m
        if self.tag == "quadratic":
            return m * m
        return m ** int(self.tag[5:])

    def budget(self, n: int) -> int:
        return self.c * self.h(n) + self.c

    def run(self, inp: str):
        """``(output, steps, cut_off)``."""
        out, steps = run(self.base, inp, self.budget(len(inp)))
        if out is None:
            return "", steps, True
        return out, steps, False

    def value(self, inp: str) -> int:
        return value_of(self.run(inp)[0])
