"""The acceptance suite: ten criteria at ``smoke`` or ``full`` scale.

Each criterion returns a ``CriterionResult``.  Results are a deterministic
function of ``(seed, scale, fixtures)``; wall-clock timings are kept apart so
reports stay byte-identical across runs.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import intalg
from .embedder import embed_preorder
from .injury import (audit_markers, decode_check, diagonalization_counts, generate_scenario,
                     run as run_injury, surviving_tops)
from .injury.scenario import Scenario
from .io import load_json, read_log
from .machina import library
from .machina.padding import curry_index, eval_G, fit_quadratic_constant, pad_p
from .pi1 import (DeltaTwoApprox, UniversalG, approx_Fn, decide_window, diagonal_L, f_table,
                  pair, rows_decide)
from .relcore import all_preorders, random_preorder, random_schedule, verify_reduction
from .stagecraft import REFeed, SegmentFeed, linear_Lx_member, run_splitting, settling_check

__all__ = ["CriterionResult", "SuiteResult", "SCALES", "CRITERIA", "run_criterion", "run_suite",
           "default_fixtures"]

SCALES = {
    "smoke": dict(schedules=60, families=10, grid=5, curry_grid=3, gadgets=50, random_elements=200,
                  embed_random=30, feeds=40, injury_runs=4, injury_stages=2000, convergent=4,
                  convergent_stages=1500, budget=60.0),
    "full": dict(schedules=200, families=30, grid=8, curry_grid=8, gadgets=60, random_elements=500,
                 embed_random=100, feeds=120, injury_runs=20, injury_stages=10_000, convergent=12,
                 convergent_stages=3000, budget=900.0),
}


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] criterion {self.number:>2}: {self.title} ({self.seconds:.1f}s)"

    def to_json(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "details": self.details, "failures": self.failures[:20]}


@dataclass
class SuiteResult:
    seed: int
    scale: str
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def seconds(self) -> float:
        # criterion 10 reports the total of the others
        return sum(r.seconds for r in self.results if r.number != 10)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "scale": self.scale,
            "passed": sum(r.passed for r in self.results),
            "failed": sum(not r.passed for r in self.results),
            "criteria": [r.to_json() for r in self.results],
            "rows": [{"criterion": r.number, "title": r.title, "passed": r.passed}
                     for r in self.results],
        }


def default_fixtures() -> Path:
    return Path(str(resources.files("compred") / "fixtures"))


def _rng(seed: int, number: int) -> random.Random:
    return random.Random(seed * 1009 + number)


# -- 1: rows decide the limit partition ---------------------------------------
def _schedules(rng, count):
    out = []
    for _ in range(count):
        out.append(random_schedule(rng, rng.randint(1, 12), rng.randint(0, 60)))
    return out


def criterion_rows_decide(seed, cfg, fixtures):
    rng = _rng(seed, 1)
    failures, pairs = [], 0
    for k, sched in enumerate(_schedules(rng, cfg["schedules"])):
        w = decide_window(sched)
        table = f_table(sched, w + 1)
        # the limit relation read straight off the final partition
        block = {x: b[0] for b in sched.stages[sched.stable_from] for x in b}
        for x in range(sched.n):
            for y in range(sched.n):
                pairs += 1
                if rows_decide(sched, x, y, w, table) != (block[x] == block[y]):
                    failures.append({"schedule": k, "x": x, "y": y})
    return {"schedules": cfg["schedules"], "pairs": pairs}, failures


# -- 2: the universal function ------------------------------------------------
def criterion_universal(seed, cfg, fixtures):
    rng = _rng(seed, 2)
    failures, members = [], 0
    for fam in range(cfg["families"]):
        family = _schedules(rng, rng.randint(1, 6))
        G = UniversalG(family)
        for i, sched in enumerate(family):
            members += 1
            rep = verify_reduction(lambda x, i=i: pair(i, x), sched.limit_relation(), G.related, sched.n)
            if not rep.ok:
                failures.append({"family": fam, "member": i, "counterexamples": rep.counterexamples[:3]})
        # codes of different members never meet unless both rows coincide
        codes = [pair(i, x) for i, s in enumerate(family) for x in range(s.n)]
        for a in codes:
            for b in codes:
                same = bool(np.array_equal(G.row(a)[: G.window + 1], G.row(b)[: G.window + 1]))
                if G.related(a, b) != same:
                    failures.append({"family": fam, "codes": [a, b]})
    return {"families": cfg["families"], "members": members}, failures


# -- 3: the approximating relations -------------------------------------------
def criterion_approximations(seed, cfg, fixtures):
    rng = _rng(seed, 3)
    failures, checked = [], 0
    for k, sched in enumerate(_schedules(rng, max(20, cfg["schedules"] // 4))):
        w = decide_window(sched)
        table = f_table(sched, w + 1)
        H = table.horizon
        for x in range(sched.n):
            for y in range(sched.n):
                checked += 1
                rel = [approx_Fn(table, n, x, y) for n in range(H + 1)]
                if not rel[0]:
                    failures.append({"schedule": k, "pair": [x, y], "msg": "F_0 misses a pair"})
                if any(b and not a for a, b in zip(rel, rel[1:])):
                    failures.append({"schedule": k, "pair": [x, y], "msg": "F_n+1 not inside F_n"})
                if all(rel) != rows_decide(sched, x, y, w, table):
                    failures.append({"schedule": k, "pair": [x, y], "msg": "intersection differs"})
    return {"pairs": checked}, failures


# -- 4: padding, the quadratic bound and curried indices -----------------------
_TOY = {"projection": (library.projection, lambda x, n: x),
        "addition": (library.addition, lambda x, n: x + n)}


def _malformed(g, x):
    good = pad_p(g, x)
    z = len(good) - x - 1
    return ["", "1", "11", "0" * 3, "1" * x + "01" + "0", "1" * x + "0" + "1" * (z + 1),
            "1" * x + "0" + "1" * max(0, z - 1), "10" + good]


def criterion_padding(seed, cfg, fixtures):
    failures = []
    details = {}
    grid = range(cfg["grid"] + 1)
    held_out = range(cfg["grid"] + 1, cfg["grid"] + 5)
    for name, (make, truth) in _TOY.items():
        g = make()
        pads = {y: pad_p(g, y) for y in list(grid) + list(held_out)}
        fit = []
        for x in grid:
            for n in grid:
                r = eval_G(g, pads[x], pads[n])
                fit.append((len(pads[x]) + len(pads[n]), r.steps))
                if r.value != truth(x, n):
                    failures.append({"g": name, "x": x, "n": n, "got": r.value})
        c = fit_quadratic_constant(fit)
        worst = 0.0
        for x in held_out:
            for n in held_out:
                r = eval_G(g, pads[x], pads[n])
                size = len(pads[x]) + len(pads[n])
                worst = max(worst, r.steps / size ** 2)
                if r.value != truth(x, n):
                    failures.append({"g": name, "x": x, "n": n, "got": r.value})
                if r.steps > c * size ** 2:
                    failures.append({"g": name, "x": x, "n": n, "steps": r.steps, "bound": c * size ** 2})
        bad = 0
        for x in range(3):
            for w in _malformed(g, x):
                for a, b in ((w, pads[x]), (pads[x], w)):
                    bad += 1
                    if eval_G(g, a, b).value != 0:
                        failures.append({"g": name, "malformed": [a, b]})
        cg = range(cfg["curry_grid"] + 1)
        curried = 0
        for x in cg:
            machine = curry_index(g, pads[x])
            for n in cg:
                curried += 1
                if machine.value(pads[n]) != eval_G(g, pads[x], pads[n]).value:
                    failures.append({"g": name, "curry": [x, n]})
            for w in _malformed(g, 1)[:4]:
                if machine.value(w) != 0:
                    failures.append({"g": name, "curry_malformed": [x, w]})
        details[name] = {"fitted_c": round(c, 6), "held_out_max_ratio": round(worst, 6),
                         "malformed_cases": bad, "curried_cases": curried}
    return details, failures


# -- 5: the diagonal gadget ---------------------------------------------------
def _gadget(rng, e):
    m = rng.randint(2, 6)
    T = rng.randint(3, 10)
    cls = [rng.randrange(rng.randint(1, m)) for _ in range(m)]
    bits = np.ones((m, m, T), dtype=np.int8)
    for x in range(m):
        for y in range(x + 1, m):
            if cls[x] != cls[y]:
                zeros = rng.sample(range(T), rng.randint(1, T))
                bits[x, y, zeros] = 0
                bits[y, x, zeros] = 0
    max_stage = rng.randint(0, T - 1)
    phi = {pair(e, s): rng.randrange(m) for s in range(max_stage + 3)}
    return DeltaTwoApprox(bits), cls, phi, max_stage


def criterion_gadget(seed, cfg, fixtures):
    rng = _rng(seed, 5)
    failures, emitted = [], 0
    for k in range(cfg["gadgets"]):
        e = rng.randint(0, 5)
        f, cls, phi, max_stage = _gadget(rng, e)
        x, y = phi[pair(e, 0)], phi[pair(e, 1)]
        witness = any(f.bits[x, y, t] == 0 for t in range(max_stage + 1))
        out = diagonal_L(f, phi, e, max_stage)
        if bool(out) != witness:
            failures.append({"instance": k, "witness": witness, "emitted": sorted(out)})
            continue
        for a, b in out:
            emitted += 1
            # a L b holds; a reduction would need phi(a) E phi(b)
            if cls[phi[a]] == cls[phi[b]]:
                failures.append({"instance": k, "pair": [a, b], "msg": "images are equivalent"})
    return {"instances": cfg["gadgets"], "emitted": emitted}, failures


# -- 6: ideal membership ------------------------------------------------------
def criterion_ideal(seed, cfg, fixtures):
    rng = _rng(seed, 6)
    failures, preorders = [], 0
    for n in range(1, 5):
        for P in all_preorders(n):
            preorders += 1
            for a in range(n):
                for b in range(n):
                    w = intalg.difference(intalg.generator(a), intalg.generator(b))
                    if intalg.ideal_member(w, P, n) != bool(P.leq[a, b]):
                        failures.append({"leq": P.leq.astype(int).tolist(), "a": a, "b": b})
    for _ in range(cfg["random_elements"]):
        n = rng.randint(1, 4)
        P = random_preorder(rng, n, rng.choice([0.2, 0.4, 0.6]))
        w = intalg.random_element(rng, n)
        if intalg.ideal_member(w, P, n) != intalg.atom_ideal_member(w, P, n):
            failures.append({"leq": P.leq.astype(int).tolist(), "element": w.to_text()})
    return {"preorders": preorders, "random_elements": cfg["random_elements"]}, failures


# -- 7: embeddings ------------------------------------------------------------
def criterion_embedding(seed, cfg, fixtures):
    rng = _rng(seed, 7)
    cases = [P for n in range(1, 5) for P in all_preorders(n)]
    exhaustive = len(cases)
    for _ in range(cfg["embed_random"]):
        cases.append(random_preorder(rng, rng.randint(1, 6), rng.choice([0.15, 0.3, 0.5])))
    failures, star_rows = [], 0
    for k, P in enumerate(cases):
        try:
            _, rep = embed_preorder(P)
        except Exception as exc:  # any failure is a criterion failure, with the preorder named
            failures.append({"case": k, "leq": P.leq.astype(int).tolist(), "error": str(exc)[:200]})
            continue
        star_rows += rep.star_rows
        if not (rep.star_ok and rep.ok):
            failures.append({"case": k, "leq": P.leq.astype(int).tolist()})
    return {"exhaustive": exhaustive, "random": cfg["embed_random"], "star_rows": star_rows}, failures


# -- 8: linear-time sets and splittings ---------------------------------------
def _changes(rng, lo, hi, gap):
    out, t = [], lo
    while t <= hi:
        out.append(t)
        t += rng.randint(1, gap)
    return out


def _lx_case(rng, horizon, s_finite):
    last = rng.randint(0, horizon // 4)
    fin = sorted(rng.sample(range(1, last + 1), rng.randint(0, last))) if last else []
    start = rng.randint(last + 1, horizon // 2)
    inf = _changes(rng, start, horizon, 5)
    S, T = (fin, inf) if s_finite else (inf, fin)
    feed = lambda st: REFeed(tuple((n, t) for n, t in enumerate(st)), horizon)
    return feed(S), feed(T), inf[0]


def _split_case(rng, horizon, k):
    lengths = {}
    for i in range(k + 3):
        seq, cur = [0], 0
        grow_until = horizon if i == k else rng.randint(1, horizon // 4)
        for s in range(1, horizon + 1):
            if s <= grow_until and rng.random() < (0.7 if i == k else 0.4):
                cur += 1
            seq.append(cur)
        lengths[i] = seq
    elems = rng.sample(range(horizon), rng.randint(horizon // 4, horizon // 2))
    stages = sorted(rng.randint(0, horizon) for _ in elems)
    return REFeed(tuple(zip(elems, stages)), horizon), SegmentFeed(lengths, horizon)


def criterion_stagewise(seed, cfg, fixtures):
    rng = _rng(seed, 8)
    failures = []
    settled = 0
    horizon = 80
    for k in range(cfg["feeds"]):
        s_finite = k % 2 == 0
        S, T, cut = _lx_case(rng, horizon, s_finite)
        for n in range(horizon + 1):
            if linear_Lx_member(S, T, "0" * n) != linear_Lx_member(S, T, "1" * n):
                failures.append({"feed": k, "length": n, "msg": "depends on more than the length"})
        tail = [linear_Lx_member(S, T, "0" * n) for n in range(cut, horizon + 1)]
        expect = not s_finite
        if any(b != expect for b in tail):
            failures.append({"feed": k, "msg": f"tail from {cut} is not {'cofinite' if expect else 'finite'}"})

        A, P = _split_case(rng, horizon, k % 4)
        split = run_splitting(A, P)
        for s in range(horizon + 1):
            E, F = split.at(s)
            if E & F or (E | F) != A.upto(s):
                failures.append({"feed": k, "stage": s, "msg": "parts do not split A"})
                break
        chk = settling_check(A, P, k % 4)
        settled += chk["checked"]
        if chk["mismatches"]:
            failures.append({"feed": k, "settling": chk})
    if settled == 0:
        failures.append({"msg": "settling property never exercised"})
    return {"feeds": cfg["feeds"], "horizon": horizon, "settling_checks": settled}, failures


# -- 9: the priority-tree simulator -------------------------------------------
def criterion_simulator(seed, cfg, fixtures):
    rng = _rng(seed, 9)
    failures = []
    audit_rows = []
    for k in range(cfg["injury_runs"]):
        sc, _ = generate_scenario(rng.randrange(10 ** 9), 12, cfg["injury_stages"], extra_unbounded=0.3)
        res = run_injury(sc)
        rep = audit_markers(res)
        counts = diagonalization_counts(res)
        audit_rows.append({"seed": sc.seed, "rule_i": len(rep.rule_i), "rule_ii": len(rep.rule_ii),
                           "column": len(rep.column), "discharged": rep.discharged,
                           "undischarged": len(rep.undischarged),
                           "diagonalizations": sum(v["count"] for v in counts.values())})
        if not rep.clean:
            failures.append({"part": "a", "seed": sc.seed, "report": rep.to_json()})

    golden = _golden_check(fixtures)
    if golden:
        failures.append({"part": "b", **golden})

    decoded = []
    for k in range(cfg["convergent"]):
        stages = cfg["convergent_stages"]
        sc, _ = generate_scenario(rng.randrange(10 ** 9), 12, stages, convergent=True, extra_unbounded=0.3)
        res = run_injury(sc)
        for tau in surviving_tops(res):
            d = decode_check(res, tau)
            decoded.append({"seed": sc.seed, **d})
            if d["wrong"]:
                failures.append({"part": "c", "seed": sc.seed, "decode": d})
        counts = diagonalization_counts(res)
        late = {n: v for n, v in counts.items() if v["last_stage"] > stages // 3}
        if late:
            failures.append({"part": "d", "seed": sc.seed, "late": late})
    if not decoded:
        failures.append({"part": "c", "msg": "no surviving top node to decode"})
    details = {
        "audited_runs": audit_rows,
        "golden": "match" if not golden else "mismatch",
        "decoded": [{k: d[k] for k in ("seed", "node", "settled", "unsettled", "wrong")} for d in decoded],
    }
    return details, failures


def _golden_check(fixtures: Path) -> Optional[dict]:
    scen = fixtures / "injury_golden.scenario.json"
    log = fixtures / "injury_golden.log.jsonl"
    try:
        sc = Scenario.from_json(load_json(scen))
        expected = log.read_text(encoding="utf-8").splitlines()
        read_log(log)
    except Exception as exc:  # a broken fixture is a named failure, not a crash
        return {"fixture": str(scen.name), "error": str(exc)[:300]}
    first, second = run_injury(sc).log_lines(), run_injury(sc).log_lines()
    if first != second:
        return {"fixture": scen.name, "error": "two runs of the same scenario differ"}
    if first != expected:
        n = next((i for i, (a, b) in enumerate(zip(first, expected)) if a != b), min(len(first), len(expected)))
        return {"fixture": log.name, "error": f"log differs from the golden file at line {n + 1}"}
    return None


CRITERIA = [
    (1, "rows decide the limit partition", criterion_rows_decide),
    (2, "pairing is a reduction into the universal relation", criterion_universal),
    (3, "approximating relations refine and meet in the limit", criterion_approximations),
    (4, "padding, quadratic step bound and curried indices", criterion_padding),
    (5, "diagonal gadget defeats its candidate reduction", criterion_gadget),
    (6, "ideal membership matches the preorder", criterion_ideal),
    (7, "preorder embeddings pass the star audit", criterion_embedding),
    (8, "linear-time tails and splittings", criterion_stagewise),
    (9, "priority-tree simulator audits, golden log and decoding", criterion_simulator),
]


def run_criterion(number: int, seed: int = 0, scale: str = "smoke",
                  fixtures: Optional[Path] = None) -> CriterionResult:
    cfg = SCALES[scale]
    fixtures = Path(fixtures) if fixtures is not None else default_fixtures()
    _, title, fn = next(c for c in CRITERIA if c[0] == number)
    t0 = time.perf_counter()
    try:
        details, failures = fn(seed, cfg, fixtures)
    except Exception as exc:  # reported as a failure of this criterion only
        details, failures = {}, [{"error": f"{type(exc).__name__}: {exc}"[:500]}]
    return CriterionResult(number, title, not failures, details, failures, time.perf_counter() - t0)


def run_suite(seed: int = 0, scale: str = "smoke", fixtures: Optional[Path] = None,
              echo: Optional[Callable[[str], None]] = None) -> SuiteResult:
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {sorted(SCALES)}")
    results = []
    for number, _, _ in CRITERIA:
        r = run_criterion(number, seed, scale, fixtures)
        results.append(r)
        if echo:
            echo(r.line())
    total = sum(r.seconds for r in results)
    budget = SCALES[scale]["budget"]
    failed = [r.number for r in results if not r.passed]
    last = CriterionResult(10, f"whole suite passes within {budget:.0f}s",
                           not failed and total < budget,
                           {"budget_seconds": budget, "failed_criteria": failed},
                           ([{"failed_criteria": failed}] if failed else [])
                           + ([{"msg": "time budget exceeded"}] if total >= budget else []),
                           total)
    results.append(last)
    if echo:
        echo(last.line())
    return SuiteResult(seed, scale, results)
