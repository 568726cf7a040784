"""Independent checks over a finished run, driven only by its event log."""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from itertools import accumulate
from .construction import RunResult, believable
from .tree import INF, ZERO, Tree, in_column

__all__ = [
    "AuditReport",
    "audit_markers",
    "replay_delta",
    "final_epoch_start",
    "diagonalization_counts",
    "surviving_tops",
    "decode_check",
    "believability_profile",
]


@dataclass
class AuditReport:
    rule_i: list = field(default_factory=list)
    rule_ii: list = field(default_factory=list)
    discharged: int = 0
    undischarged: list = field(default_factory=list)
    abandoned: int = 0
    column: list = field(default_factory=list)
    consistency: list = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not (self.rule_i or self.rule_ii or self.column or self.consistency)

    def to_json(self) -> dict:
        return {
            "clean": self.clean,
            "rule_i": self.rule_i,
            "rule_ii": self.rule_ii,
            "rule_iii": {"discharged": self.discharged, "abandoned": self.abandoned,
                         "undischarged_at_end": self.undischarged},
            "column": self.column,
            "consistency": self.consistency,
        }


def _enumerations(ev) -> list:
    """``(set, element)`` pairs an event puts into the V sets."""
    _, kind, _, d = ev
    if kind == "diagonalize":
        return [(d["set"], d["l"])]
    if kind in ("correct", "marker-enumerate"):
        return [(d["set"], d["value"])]
    return []


def audit_markers(result: RunResult) -> AuditReport:
    """Replay the log and check the marker rules at every event.

    Rule (i): markers increase in their argument.  Rule (ii): outside an
    initialization, a marker is dropped only at a stage where its reduction's
    oracle set received an element at or below the old value.  Rule (iii):
    each entrant with a defined marker is followed by such a change, unless
    its node is initialized first; open obligations at the end are listed.
    """
    tree = Tree(result.scenario.depth)
    rep = AuditReport()
    table = {}  # top node -> {x: value}
    changes = {}  # (set, stage) -> least element enumerated so far
    open_obl = []  # [tau, x, marker, stage]
    biggest = -1
    for ev in result.events:
        s, kind, node, d = ev
        enums = _enumerations(ev)
        for idx, x in enums:
            changes[(idx, s)] = min(changes.get((idx, s), x), x)
        if kind == "extend":
            marks = table.setdefault(node, {})
            x, v = d["x"], d["value"]
            if x in marks:
                rep.consistency.append({"stage": s, "node": node, "msg": f"marker {x} redefined while defined"})
            below, above = marks.get(x - 1), marks.get(x + 1)
            if (below is not None and below >= v) or (above is not None and above <= v):
                rep.rule_i.append({"stage": s, "node": node, "x": x, "value": v})
            if not in_column(v, node):
                rep.column.append({"stage": s, "node": node, "msg": f"marker {v} outside the column"})
            if v <= biggest:
                rep.column.append({"stage": s, "node": node, "msg": f"marker {v} is not fresh"})
            marks[x] = v
        elif kind in ("correct", "marker-enumerate"):
            tau = node if kind == "correct" else d["top"]
            marks = table.setdefault(tau, {})
            j = tree.ij(tau)[1]
            if d["set"] != j:
                rep.consistency.append({"stage": s, "node": node, "msg": "enumeration into the wrong set"})
            for y, old in d["undefined"]:
                if marks.get(y) != old:
                    rep.consistency.append({"stage": s, "node": tau, "msg": f"undefined marker {y}={old} not in table"})
                least = changes.get((j, s))
                if least is None or least > old:
                    rep.rule_ii.append({"stage": s, "node": tau, "x": y, "old": old})
                marks.pop(y, None)
        elif kind == "diagonalize":
            if not in_column(d["l"], node):
                rep.column.append({"stage": s, "node": node, "msg": f"diagonalized {d['l']} outside the column"})
        elif kind == "init":
            table.pop(node, None)
            rep.abandoned += sum(1 for ob in open_obl if ob[0] == node)
            open_obl = [ob for ob in open_obl if ob[0] != node]
        for idx, x in enums:
            keep = []
            for ob in open_obl:
                if tree.ij(ob[0])[1] == idx and x <= ob[2]:
                    rep.discharged += 1
                else:
                    keep.append(ob)
            open_obl = keep
            for tau, marks in table.items():
                if tree.ij(tau)[0] == idx and x in marks:
                    open_obl.append([tau, x, marks[x], s])
        for key in ("value", "l", "use"):
            if key in d:
                biggest = max(biggest, d[key])
    rep.undischarged = [{"node": t, "x": x, "marker": m, "stage": st} for t, x, m, st in open_obl]
    return rep


def final_epoch_start(result: RunResult, tau: str) -> int:
    """Index of the first event after ``tau``'s last initialization."""
    start = 0
    for n, (_, kind, node, _) in enumerate(result.events):
        if kind == "init" and node == tau:
            start = n + 1
    return start


def _marker_history(result: RunResult, tau: str) -> dict:
    """``x -> [(stage, value or None)]`` within the final epoch, end-of-stage values."""
    hist = {}
    events = result.events[final_epoch_start(result, tau):]
    for s, kind, node, d in events:
        if kind == "extend" and node == tau:
            hist.setdefault(d["x"], []).append((s, d["value"]))
        elif (kind == "correct" and node == tau) or (kind == "marker-enumerate" and d["top"] == tau):
            for y, _ in d["undefined"]:
                hist.setdefault(y, []).append((s, None))
    return hist


class _Decoder:
    """Replay state for one top node: its final-epoch marker history and ``V_j`` timing."""

    def __init__(self, result: RunResult, tau: str):
        tree = Tree(result.scenario.depth)
        self.i, j = tree.ij(tau)
        self.result = result
        self.hist = _marker_history(result, tau)
        pairs = sorted(result.V[j])
        self.vj_elems = [y for y, _ in pairs]
        self.vj_late = list(accumulate((t for _, t in pairs), max))
        self.vi_stage = dict(result.V[self.i])

    def late(self, value: int) -> int:
        """Last stage at which ``V_j`` changed at or below ``value``."""
        n = bisect_right(self.vj_elems, value)
        return self.vj_late[n - 1] if n else -1

    def decode(self, x: int):
        at_end = {}
        for s, value in self.hist.get(x, []):
            at_end[s] = value
        stages = sorted(at_end)
        S = self.result.scenario.stages
        for n, s in enumerate(stages):
            value = at_end[s]
            if value is None:
                continue
            end = stages[n + 1] if n + 1 < len(stages) else S + 1
            t = max(s, self.late(value))
            if t < end:
                entered = self.vi_stage.get(x)
                return 1 if entered is not None and entered <= t else 0
        return "unsettled"


def replay_delta(result: RunResult, tau: str, x: int):
    """Decode ``x in V_i`` from the ``V_j`` history and ``tau``'s markers.

    Finds the first stage ``s`` at which ``delta(x)[s]`` is defined and
    ``V_j[s]`` already agrees with the final ``V_j`` up to it; answers
    ``x in V_i[s]``.  Returns ``"unsettled"`` if there is no such stage.
    """
    return _Decoder(result, tau).decode(x)


def diagonalization_counts(result: RunResult) -> dict:
    out = {}
    for s, kind, node, _ in result.events:
        if kind == "diagonalize":
            c, _ = out.get(node, (0, None))
            out[node] = (c + 1, s)
    return {k: {"count": c, "last_stage": s} for k, (c, s) in sorted(out.items())}


def surviving_tops(result: RunResult) -> list:
    """Top nodes on the final path with outcome 0 and no later same-pair infinity node."""
    tree = Tree(result.scenario.depth)
    path = result.tp[-1]
    out = []
    for n in range(len(path)):
        tau = path[:n]
        if not tree.is_top(tau) or path[n] != ZERO:
            continue
        ij = tree.ij(tau)
        if any(path[m] == INF and tree.ij(path[:m]) == ij for m in range(n + 1, len(path))):
            continue
        out.append(tau)
    return out


def decode_check(result: RunResult, tau: str, xs=None) -> dict:
    dec = _Decoder(result, tau)
    final = result.final_set(dec.i)
    if xs is None:
        xs = sorted(dec.hist)
    settled = wrong = unsettled = 0
    bad = []
    for x in xs:
        bit = dec.decode(x)
        if bit == "unsettled":
            unsettled += 1
            continue
        settled += 1
        if bit != (1 if x in final else 0):
            wrong += 1
            bad.append(x)
    return {"node": tau, "settled": settled, "unsettled": unsettled, "wrong": wrong, "witnesses": bad[:10]}


def believability_profile(result: RunResult, alpha: str, computations: dict) -> dict:
    """Believability at the end of the run of ``{l: use}`` convergences for ``alpha``."""
    tree = Tree(result.scenario.depth)
    out = {}
    for l, use in sorted(computations.items()):
        b = believable(tree, result.deltas, result.pending, alpha, l, use)
        out[l] = {"ok": b.ok, "reason": b.reason, "witness": list(b.witness)}
    return out
