"""Stage-by-stage simulation of the priority-tree construction.

Each stage ``s >= 1`` walks ``min(s, depth)`` levels of the tree, plays an
outcome at each visited node and acts according to the node's kind:

* non-top, outcome 0: nothing;
* top, outcome infinity: reset its own markers and try to diagonalize;
* non-top, outcome infinity: pick ``k`` or lift the top's marker at ``k``,
  then try to diagonalize;
* top, outcome 0: correct the least pending entrant, then extend the markers.

Markers of a node always form a prefix ``delta[0] < delta[1] < ...``: every
undefinition also drops all larger markers, so a fresh value for the least
undefined argument keeps them increasing.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .scenario import Scenario
from .tree import INF, ZERO, Tree, column_at_least

__all__ = [
    "Believability",
    "believable",
    "PhiCache",
    "Simulator",
    "RunResult",
    "run",
    "InternalError",
]


class InternalError(RuntimeError):
    """A construction invariant broke; carries the event log so far."""

    def __init__(self, msg: str, events: list):
        tail = "\n".join(event_json(e) for e in events[-20:])
        super().__init__(f"{msg}\nlast events:\n{tail}")
        self.events = list(events)


@dataclass(frozen=True)
class Believability:
    ok: bool
    reason: Optional[str] = None
    witness: tuple = ()


def believable(tree: Tree, deltas: dict, pending: dict, alpha: str, l: int, use: int) -> Believability:
    """Is a convergence at ``l`` with this use safe for ``alpha``?

    Fails if some ``beta`` in ``Z0(alpha)`` has a pending marker below the use,
    or if a chain of distinct ``Z0`` nodes leads from ``j_alpha`` back to
    ``i_alpha`` with every ``delta_beta(l) <= use``.
    """
    z0, _ = tree.z_sets(alpha)
    for beta in z0:
        for x, (d, _) in sorted(pending.get(beta, {}).items()):
            if d < use:
                return Believability(False, "pending", (beta, x, d))
    i_a, j_a = tree.ij(alpha)
    edges = {}
    for beta in z0:
        dl = deltas.get(beta, ())
        if l < len(dl) and dl[l] <= use:
            i_b, j_b = tree.ij(beta)
            edges.setdefault(j_b, []).append((i_b, beta))
    if not edges:
        return Believability(True)
    # shortest chain of at least one edge from j_alpha to i_alpha
    queue = deque()
    seen = {}
    for i_b, beta in edges.get(j_a, ()):
        if i_b not in seen:
            seen[i_b] = (beta,)
            queue.append(i_b)
    while queue:
        v = queue.popleft()
        if v == i_a:
            return Believability(False, "chain", seen[v])
        for i_b, beta in edges.get(v, ()):
            if i_b not in seen:
                seen[i_b] = seen[v] + (beta,)
                queue.append(i_b)
    return Believability(True)


class PhiCache:
    """Agreement prefix of ``Phi_e`` (oracle ``V_j``) with ``V_i``.

    ``agreed`` is the length of the verified prefix: every ``l' < agreed``
    converged with value ``V_i(l')``.  Verified runs stay valid until ``V_j``
    changes below their use or ``V_i`` changes at their argument.
    """

    def __init__(self, functional, i: int, j: int):
        self.functional = functional
        self.i, self.j = i, j
        self.agreed = 0
        self.uses = np.zeros(64, dtype=np.int64)
        self.blocked = None  # (l, use) of a converged disagreement at l == agreed

    def on_change(self, index: int, x: int):
        if index == self.i and x < self.agreed:
            self._cut(x)
        if index == self.i and self.blocked is not None and x == self.blocked[0]:
            self.blocked = None
        if index == self.j:
            if self.agreed:
                hit = np.nonzero(self.uses[: self.agreed] > x)[0]
                if len(hit):
                    self._cut(int(hit[0]))
            if self.blocked is not None and self.blocked[1] > x:
                self.blocked = None

    def _cut(self, n: int):
        self.agreed = n
        self.blocked = None

    def advance(self, limit: int, oracle: np.ndarray, vi_bit, budget: int):
        if self.functional is None:
            return
        while self.agreed < limit and self.blocked is None:
            l = self.agreed
            ok, value, use = self.functional.compute(l, oracle, budget)
            if not ok:
                return
            if value != vi_bit(l):
                self.blocked = (l, use)
                return
            if l >= len(self.uses):
                self.uses = np.concatenate([self.uses, np.zeros(len(self.uses), dtype=np.int64)])
            self.uses[l] = use
            self.agreed += 1


def event_json(ev) -> str:
    stage, kind, node, data = ev
    return json.dumps({"stage": stage, "kind": kind, "node": node, **data}, separators=(",", ":"))


@dataclass(frozen=True)
class RunResult:
    scenario: Scenario
    V: tuple  # per index: tuple of (element, stage) in enumeration order
    tp: tuple  # tp[s] for s = 0..S
    events: tuple
    fresh_trace: tuple
    deltas: dict  # final marker prefixes of live top nodes
    pending: dict
    k_values: dict
    include_self_inits: bool = False

    def log_lines(self) -> list:
        return [event_json(e) for e in self.events]

    def write_log(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.log_lines():
                fh.write(line + "\n")

    def final_set(self, i: int) -> frozenset:
        return frozenset(x for x, _ in self.V[i])

    def set_at(self, i: int, s: int) -> frozenset:
        return frozenset(x for x, t in self.V[i] if t <= s)


class Simulator:
    def __init__(self, scenario: Scenario, include_self_inits: bool = False):
        self.sc = scenario
        self.tree = scenario.tree()
        self.include_self_inits = include_self_inits
        n = self.tree.indices()
        self.V = [[] for _ in range(n)]
        self.members = [set() for _ in range(n)]
        width = scenario.stages + 2
        self.bits = [np.zeros(width, dtype=np.int8) for _ in range(n)]
        self.events = []
        self.deltas = {}  # top node -> list of marker values
        self.pending = {}  # top node -> {x: (marker, stage entered)}
        self.k = {}  # non-top node -> k parameter
        self.last_count = {}
        self.ext_mark = {"": 0}  # subtree root -> last stage initialized by another node
        self.self_mark = {}
        self.fresh = 0
        self.small_fresh = 0  # k parameters: above every earlier k and witness
        self.caches = {}
        self.tp = [""]
        self.fresh_trace = [0]

    # -- bookkeeping -------------------------------------------------------
    def log(self, s, kind, node, **data):
        self.events.append((s, kind, node, data))

    def mention(self, v: int):
        if v >= self.fresh:
            self.fresh = v + 1

    def cache(self, alpha: str) -> PhiCache:
        lab = self.tree.label(alpha)
        key = (lab.e, lab.i, lab.j)
        c = self.caches.get(key)
        if c is None:
            c = self.caches[key] = PhiCache(self.sc.functional(lab.e), lab.i, lab.j)
        return c

    def enumerate(self, index: int, x: int, s: int):
        if x in self.members[index]:
            raise InternalError(f"{x} enumerated into V{index} twice", self.events)
        self.members[index].add(x)
        self.V[index].append((x, s))
        self.mention(x)
        if x < len(self.bits[index]):
            self.bits[index][x] = 1
        for c in self.caches.values():
            c.on_change(index, x)
        # a change at or below a pending marker discharges it
        for tau, recs in self.pending.items():
            if self.tree.ij(tau)[1] == index:
                for y in [y for y, (d, _) in recs.items() if x <= d]:
                    del recs[y]
        # x entering V_i while delta_tau(x) is defined starts an obligation
        for tau, dl in self.deltas.items():
            if self.tree.ij(tau)[0] == index and x < len(dl):
                self.pending.setdefault(tau, {})[x] = (dl[x], s)

    def initialize(self, root: str, s: int, by: str):
        if by == root:
            self.self_mark[root] = s
        else:
            self.ext_mark[root] = s
        for node in sorted(n for n in set(self.deltas) | set(self.k) if n.startswith(root)):
            dl = self.deltas.pop(node, [])
            pend = self.pending.pop(node, {})
            k = self.k.pop(node, None)
            if dl or pend or k is not None:
                self.log(s, "init", node, by=by, markers=len(dl), k=k, abandoned=sorted(pend))

    def l_bound(self, alpha: str) -> int:
        bound = max(self.ext_mark.get(alpha[:n], -1) for n in range(len(alpha) + 1))
        if self.include_self_inits:
            bound = max(bound, self.self_mark.get(alpha, -1))
        return bound

    # -- actions -----------------------------------------------------------
    def try_diagonalize(self, alpha: str, s: int):
        lab = self.tree.label(alpha)
        i, j = lab.i, lab.j
        lo = self.l_bound(alpha) + 1
        first = column_at_least(alpha, lo)
        if first >= s:
            return None
        cache = self.cache(alpha)
        members = self.members[i]
        cache.advance(s, self.bits[j][:s], lambda l: 1 if l in members else 0, s)
        l = first
        while l < min(s, cache.agreed):
            if l not in members:
                use = int(cache.uses[l])
                b = believable(self.tree, self.deltas, self.pending, alpha, l, use)
                if b.ok:
                    self.enumerate(i, l, s)
                    self.mention(use)
                    self.small_fresh = max(self.small_fresh, l + 1)
                    self.log(s, "diagonalize", alpha, l=l, use=use, set=i)
                    for ch in (INF, ZERO):
                        if len(alpha) + 1 < self.tree.depth:
                            self.initialize(alpha + ch, s, alpha)
                    return l
            l = column_at_least(alpha, l + 1)
        return None

    def undefine_from(self, tau: str, x: int) -> list:
        dl = self.deltas[tau]
        gone = [[y, dl[y]] for y in range(x, len(dl))]
        del dl[x:]
        return gone

    def act(self, alpha: str, outcome: str, s: int):
        tree = self.tree
        top = tree.is_top(alpha)
        if not top and outcome == ZERO:
            return
        if top and outcome == INF:
            self.initialize(alpha, s, alpha)
            self.try_diagonalize(alpha, s)
            return
        if not top:
            tau = tree.top_of(alpha)
            k = self.k.get(alpha)
            if k is None:
                k = self.small_fresh
                self.small_fresh = k + 1
                self.k[alpha] = k
                self.log(s, "k-define", alpha, k=k)
            else:
                dl = self.deltas.get(tau, [])
                if k < len(dl):
                    v = dl[k]
                    j = tree.ij(tau)[1]
                    gone = self.undefine_from(tau, k)
                    self.enumerate(j, v, s)
                    self.log(s, "marker-enumerate", alpha, top=tau, x=k, value=v, set=j, undefined=gone)
            self.try_diagonalize(alpha, s)
            return
        # top node, outcome 0
        dl = self.deltas.setdefault(alpha, [])
        recs = self.pending.get(alpha)
        if recs:
            x = min(recs)
            if x >= len(dl):
                raise InternalError(f"pending entrant {x} of {alpha!r} has no marker", self.events)
            v = dl[x]
            j = tree.ij(alpha)[1]
            gone = self.undefine_from(alpha, x)
            self.enumerate(j, v, s)
            self.log(s, "correct", alpha, x=x, value=v, set=j, undefined=gone)
        k = len(dl)
        if k < s:
            v = column_at_least(alpha, self.fresh)
            if dl and v <= dl[-1]:
                raise InternalError(f"marker {v} for {alpha!r} breaks monotonicity", self.events)
            dl.append(v)
            self.mention(v)
            self.log(s, "extend", alpha, x=k, value=v)

    def stage(self, s: int):
        alpha = ""
        for level in range(min(s, self.tree.depth)):
            count = self.sc.count(level, s)
            before = self.last_count.get(alpha, self.sc.count(level, 0))
            outcome = INF if count > before else ZERO
            self.last_count[alpha] = count
            self.log(s, "visit", alpha, outcome=outcome)
            if outcome == INF and level + 1 < self.tree.depth:
                self.initialize(alpha + ZERO, s, alpha)
            self.act(alpha, outcome, s)
            alpha += outcome
        self.tp.append(alpha)
        self.fresh_trace.append(self.fresh)

    def run(self) -> RunResult:
        # stage 0 initializes every node; nothing is defined yet
        for s in range(1, self.sc.stages + 1):
            self.stage(s)
        return RunResult(
            scenario=self.sc,
            V=tuple(tuple(v) for v in self.V),
            tp=tuple(self.tp),
            events=tuple(self.events),
            fresh_trace=tuple(self.fresh_trace),
            deltas={k: tuple(v) for k, v in self.deltas.items() if v},
            pending={k: dict(v) for k, v in self.pending.items() if v},
            k_values=dict(self.k),
            include_self_inits=self.include_self_inits,
        )


def run(scenario: Scenario, include_self_inits: bool = False) -> RunResult:
    return Simulator(scenario, include_self_inits).run()
