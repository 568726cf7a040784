"""``compred`` command line: validate inputs, run constructions, run the acceptance suite.

Exit codes: 0 pass, 1 check failure, 2 input error.
"""
from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from . import io
from .io import InputError, Issue

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2


def _emit(report: dict, args) -> None:
    text = io.dumps_report(report, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(path, kind):
    return io.load_document(path, kind)


# -- validate -----------------------------------------------------------------
def cmd_validate(args) -> int:
    worst = EXIT_OK
    for path in args.paths:
        try:
            data = io.load_json(path)
        except InputError as exc:
            print(exc, file=sys.stderr)
            worst = EXIT_INPUT
            continue
        kind, issues = io.check_document(data, args.kind)
        if kind is None:
            print(InputError(path, issues), file=sys.stderr)
            worst = EXIT_INPUT
            continue
        if issues:
            print(InputError(path, issues), file=sys.stderr)
            worst = max(worst, EXIT_CHECK)
        else:
            print(f"{path}: ok ({kind}.v1)")
    return worst


# -- run pi1 ------------------------------------------------------------------
def run_pi1(args) -> int:
    from .pi1 import decide_window, f_table, rows_decide
    from .relcore import random_schedule

    if args.schedule:
        sched = _load(args.schedule, "schedule")
    else:
        sched = random_schedule(random.Random(args.seed), 8, 20)
    w = decide_window(sched)
    horizon = max(args.horizon or 0, w + 1)
    table = f_table(sched, horizon)
    matrix = [[rows_decide(sched, x, y, w, table) for y in range(sched.n)] for x in range(sched.n)]
    limit = sched.limit_relation()
    mismatches = [[x, y] for x in range(sched.n) for y in range(sched.n)
                  if matrix[x][y] != (x == y or limit.related(x, y))]
    report = {
        "construction": "pi1",
        "n": sched.n,
        "stable_from": sched.stable_from,
        "window": w,
        "horizon": horizon,
        "limit_blocks": [list(b) for b in sched.limit()],
        "f_table": table.values,
        "rows_decide": matrix,
        "mismatches": mismatches,
        "ok": not mismatches,
        "rows": [{"x": x, **{f"n{n}": int(table.values[x, n]) for n in range(horizon)}}
                 for x in range(sched.n)],
    }
    _emit(report, args)
    return EXIT_OK if not mismatches else EXIT_CHECK


# -- run machina --------------------------------------------------------------
def run_machina(args) -> int:
    from .machina import library
    from .machina.machine import run
    from .machina.padding import curry_index, encode_pair, eval_G, fit_quadratic_constant, pad_p

    cap = args.step_cap
    if args.machine:
        g = _load(args.machine, "machine")
    else:
        g = library.BINARY[args.g]()
    grid = range(args.grid + 1)
    pads = {y: pad_p(g, y, cap) for y in grid}
    rows, bad, samples = [], [], []
    for x in grid:
        curried = curry_index(g, pads[x])
        for n in grid:
            r = eval_G(g, pads[x], pads[n])
            out, _ = run(g, encode_pair(x, n), cap)
            direct = None if out is None else out.count("1")
            via_index = curried.value(pads[n])
            samples.append((len(pads[x]) + len(pads[n]), r.steps))
            rows.append({"x": x, "n": n, "G": r.value, "g": direct, "curried": via_index, "steps": r.steps})
            if r.value != direct or via_index != r.value:
                bad.append([x, n])
    report = {
        "construction": "machina",
        "machine": g.name or "custom",
        "pads": {str(y): len(p) for y, p in pads.items()},
        "fitted_c": round(fit_quadratic_constant(samples), 6),
        "mismatches": bad,
        "ok": not bad,
        "rows": rows,
    }
    _emit(report, args)
    return EXIT_OK if not bad else EXIT_CHECK


# -- run stagecraft -----------------------------------------------------------
def _random_bundle(seed: int, horizon: int) -> dict:
    rng = random.Random(seed)
    s_events = sorted(rng.sample(range(1, horizon // 3 + 1), 3))
    t_events = list(range(horizon // 3 + 1, horizon + 1, 4))
    lengths = {"0": [min(s, 5) for s in range(horizon + 1)], "1": list(range(horizon + 1))}
    elems = rng.sample(range(horizon), horizon // 3)
    stages = sorted(rng.randint(0, horizon) for _ in elems)
    return {
        "horizon": horizon,
        "S": {"events": [[n, t] for n, t in enumerate(s_events)], "horizon": horizon},
        "T": {"events": [[n, t] for n, t in enumerate(t_events)], "horizon": horizon},
        "A": {"events": [list(p) for p in zip(elems, stages)], "horizon": horizon},
        "P": {"segments": lengths, "horizon": horizon},
        "column": 1,
        "Wi": {"events": [[1, 1], [2, 2], [4, 3]], "horizon": horizon},
        "Wj": {"events": [], "horizon": horizon},
    }


def run_stagecraft(args) -> int:
    from .stagecraft import Lx_tail, REFeed, SegmentFeed, ece_window, run_splitting, settling_check

    if args.input:
        bundle = _load(args.input, "stagecraft")
    else:
        bundle = _random_bundle(args.seed, args.horizon or 40)
    horizon = args.horizon or bundle["horizon"]
    report = {"construction": "stagecraft", "horizon": horizon}
    ok = True
    if "S" in bundle and "T" in bundle:
        S = REFeed.from_json(bundle["S"], horizon)
        T = REFeed.from_json(bundle["T"], horizon)
        report["Lx_bits"] = [int(b) for b in Lx_tail(S, T, horizon)]
    if "A" in bundle and "P" in bundle:
        A = REFeed.from_json(bundle["A"], horizon)
        P = SegmentFeed.from_json(bundle["P"], horizon)
        split = run_splitting(A, P)
        report["splitting"] = {"E": sorted(split.E_part.items()), "F": sorted(split.F_part.items())}
        for s in range(horizon + 1):
            E, F = split.at(s)
            if E & F or (E | F) != A.upto(s):
                ok = False
        if "column" in bundle:
            chk = settling_check(A, P, bundle["column"])
            report["settling"] = chk
            ok = ok and not chk["mismatches"]
    if "Wi" in bundle and "Wj" in bundle:
        Wi = REFeed.from_json(bundle["Wi"], horizon)
        Wj = REFeed.from_json(bundle["Wj"], horizon)
        report["ece"] = {}
        for kind in ("E0", "E1", "E2", "E3"):
            e = ece_window(Wi, Wj, kind, horizon)
            report["ece"][kind] = {"label": e.label, "no_difference_seen": e.no_difference_seen, **e.data}
    report["ok"] = ok
    _emit(report, args)
    return EXIT_OK if ok else EXIT_CHECK


# -- run embed ----------------------------------------------------------------
def run_embed(args) -> int:
    from .embedder import embed_preorder
    from .relcore import random_preorder

    if args.preorder:
        P = _load(args.preorder, "preorder")
        if P.check():
            raise InputError(args.preorder, [Issue("/", v) for v in P.check()])
    else:
        P = random_preorder(random.Random(args.seed), args.points)
    try:
        _, rep = embed_preorder(P)
    except RuntimeError as exc:
        _emit({"construction": "embed", "ok": False, "error": str(exc)}, args)
        return EXIT_CHECK
    report = {"construction": "embed", "leq": P.leq.astype(int), **rep.to_json()}
    report["rows"] = [{"n": n, "k": k, "preorder": p, "images": b} for n, k, p, b in rep.equivalence]
    report["ok"] = bool(rep.ok and rep.star_ok)
    _emit(report, args)
    return EXIT_OK if report["ok"] else EXIT_CHECK


# -- run injury ---------------------------------------------------------------
def run_injury_cmd(args) -> int:
    from .injury import (audit_markers, decode_check, diagonalization_counts, generate_scenario, run,
                         surviving_tops)
    from .injury.scenario import Scenario

    if args.scenario:
        sc = _load(args.scenario, "scenario")
        if args.stages is not None:
            sc = Scenario(sc.depth, args.stages, sc.feeds, sc.functionals, sc.seed)
    else:
        sc, _ = generate_scenario(args.seed, args.depth, args.stages if args.stages is not None else 200,
                                  extra_unbounded=0.3)
    res = run(sc, include_self_inits=args.self_inits)
    if args.log:
        res.write_log(args.log)
    report = {
        "construction": "injury",
        "depth": sc.depth,
        "stages": sc.stages,
        "final_path": res.tp[-1],
        "V": {str(i): len(v) for i, v in enumerate(res.V)},
        "events": len(res.events),
        "diagonalizations": diagonalization_counts(res),
        "decoding": [decode_check(res, tau) for tau in surviving_tops(res)],
    }
    ok = True
    if args.audit:
        rep = audit_markers(res)
        report["audit"] = rep.to_json()
        ok = rep.clean
    report["ok"] = ok
    report["rows"] = [{"node": n, "count": v["count"], "last_stage": v["last_stage"]}
                      for n, v in report["diagonalizations"].items()]
    _emit(report, args)
    return EXIT_OK if ok else EXIT_CHECK


RUNNERS = {"pi1": run_pi1, "machina": run_machina, "stagecraft": run_stagecraft,
           "embed": run_embed, "injury": run_injury_cmd}


def cmd_run(args) -> int:
    return RUNNERS[args.construction](args)


# -- suite --------------------------------------------------------------------
def cmd_suite(args) -> int:
    from .suite import run_suite

    res = run_suite(args.seed, args.scale, args.fixtures, echo=lambda line: print(line, file=sys.stderr))
    n_pass = sum(r.passed for r in res.results)
    print(f"{n_pass} passed, {len(res.results) - n_pass} failed in {res.seconds:.1f}s", file=sys.stderr)
    if args.out:
        io.write_report(res.to_json(), args.out, args.format)
    return EXIT_OK if res.passed else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for generated inputs")
    common.add_argument("--out", help="report path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="compred", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="schema and invariant check of input files")
    v.add_argument("paths", nargs="+")
    v.add_argument("--kind", choices=io.KINDS, help="format to check against (default: detect)")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("run", help="run one construction and write its report", parents=[common])
    r.add_argument("construction", choices=sorted(RUNNERS))
    r.add_argument("--schedule", help="pi1: schedule file")
    r.add_argument("--machine", help="machina: machine file (default: a built-in g)")
    r.add_argument("--g", choices=("projection", "addition"), default="addition")
    r.add_argument("--grid", type=int, default=6, help="machina: evaluate x, n <= GRID")
    r.add_argument("--step-cap", type=int, default=10 ** 6, help="machina: hard cap for step counting")
    r.add_argument("--input", help="stagecraft: feed bundle file")
    r.add_argument("--preorder", help="embed: preorder file")
    r.add_argument("--points", type=int, default=4, help="embed: size of a generated preorder")
    r.add_argument("--scenario", help="injury: scenario file")
    r.add_argument("--depth", type=int, default=8, help="injury: depth of a generated scenario")
    r.add_argument("--stages", type=int, help="injury: stage budget (overrides the scenario)")
    r.add_argument("--horizon", type=int, help="pi1/stagecraft: horizon")
    r.add_argument("--audit", action="store_true", help="injury: audit the marker rules")
    r.add_argument("--log", help="injury: write the event log (JSON lines)")
    r.add_argument("--self-inits", action="store_true",
                   help="injury: self-initializations also bound the diagonalization witness")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("suite", help="run the acceptance suite", parents=[common])
    s.add_argument("--scale", choices=("smoke", "full"), default="smoke")
    s.add_argument("--fixtures", help="directory holding the golden fixtures")
    s.set_defaults(func=cmd_suite)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"{exc.filename or '-'}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
