import dataclasses
import json
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compred.injury import (INF, ZERO, Label, RunResult, Scenario, Simulator, Tree, audit_markers,
                            believable, decode_check, diagonalization_counts, generate_scenario,
                            node_code, replay_delta, run, surviving_tops, unpair4)
from compred.injury.tree import column_at_least, in_column, is_left_of, pair4
from compred.pi1 import pair

from conftest import FIXTURES, seeds


def load(name):
    return json.loads((FIXTURES / name).read_text())


def constant_scenario(depth, stages, functionals=()):
    return Scenario(depth, stages, {l: [0] for l in range(depth)}, functionals)


def finish(sim):
    return RunResult(sim.sc, tuple(tuple(v) for v in sim.V), tuple(sim.tp), tuple(sim.events),
                     tuple(sim.fresh_trace), {k: tuple(v) for k, v in sim.deltas.items() if v},
                     {k: dict(v) for k, v in sim.pending.items() if v}, dict(sim.k))


def events_of(res, kind):
    return [e for e in res.events if e[1] == kind]


# -- tree

@given(st.integers(0, 10 ** 6))
def test_label_pairing_round_trip(n):
    assert pair4(*unpair4(n)) == n


def test_node_codes_are_distinct():
    nodes = [""] + ["".join(b) for d in range(1, 7) for b in product("i0", repeat=d)]
    assert sorted(node_code(a) for a in nodes) == list(range(len(nodes)))
    assert in_column(column_at_least("0i", 100), "0i") and column_at_least("0i", 100) >= 100
    assert column_at_least("", 0) == pair(0, 0)
    assert is_left_of("i0", "0") and not is_left_of("0", "i0") and not is_left_of("0", "0i")


@st.composite
def labelled_nodes(draw):
    depth = draw(st.integers(1, 10))
    labels = [Label(draw(st.integers(0, 2)), draw(st.integers(0, 2)), 0, l) for l in range(depth)]
    alpha = draw(st.text("i0", max_size=depth - 1))
    return Tree(depth, labels), alpha


def brute_is_top(tree, alpha):
    same = [n for n in range(len(alpha)) if tree.labels[n][:2] == tree.labels[len(alpha)][:2]]
    return not same or alpha[max(same)] == INF


@given(labelled_nodes())
def test_classify_matches_predecessor_scan(case):
    tree, alpha = case
    kind, tau = tree.classify(alpha)
    assert (kind == "top") == brute_is_top(tree, alpha)
    if kind == "top":
        assert tau == alpha
    else:
        cands = [alpha[:n] for n in range(len(alpha))
                 if tree.labels[n][:2] == tree.labels[len(alpha)][:2] and brute_is_top(tree, alpha[:n])]
        assert tau == cands[-1]


@given(labelled_nodes())
def test_z_sets_match_predecessor_filter(case):
    tree, alpha = case
    z0, zi = tree.z_sets(alpha)
    assert set(z0) == {alpha[:n] for n in range(len(alpha))
                       if alpha[n] == ZERO and brute_is_top(tree, alpha[:n])}
    assert set(zi) == {alpha[:n] for n in range(len(alpha))
                       if alpha[n] == INF and not brute_is_top(tree, alpha[:n])}


def test_tree_examples():
    tree = Tree(3, [Label(0, 1, 0, 0), Label(0, 1, 0, 1), Label(2, 2, 0, 0)])
    assert tree.classify("") == ("top", "")
    assert tree.classify("0") == ("child", "")
    assert tree.classify("i") == ("top", "i")
    assert tree.z_sets("") == ((), ())
    assert tree.z_sets("0") == (("",), ())
    assert tree.z_sets("0i") == (("",), ("0",))


# -- true path

def test_constant_feeds_walk_the_zero_path():
    res = run(constant_scenario(4, 9))
    assert list(res.tp) == [ZERO * min(s, 4) for s in range(10)]


def test_root_growing_every_stage():
    sc = Scenario(3, 8, {0: list(range(9)), 1: [0], 2: [0]}, ())
    res = run(sc)
    assert all(res.tp[s][0] == INF for s in range(1, 9))


def test_hand_traced_path():
    fx = load("tp_hand_trace.json")
    res = run(Scenario.from_json(fx["scenario"]))
    assert list(res.tp) == fx["expected_tp"]


# -- believability

def test_believability_fixture():
    fx = load("believability_chain.json")
    tree = Tree(fx["depth"])
    deltas = {k: list(v) for k, v in fx["deltas"].items()}
    for case in fx["cases"]:
        pending = {b: {int(x): tuple(v) for x, v in recs.items()} for b, recs in case["pending"].items()}
        got = believable(tree, deltas, pending, fx["alpha"], fx["l"], case["use"])
        assert (got.ok, got.reason, list(got.witness)) == (case["ok"], case["reason"], case["witness"])


def test_empty_z0_is_always_believable():
    tree = Tree(5)
    for alpha in ("", "i", "ii", "iii"):
        if not tree.z_sets(alpha)[0]:
            assert believable(tree, {"": [0]}, {"": {0: (0, 1)}}, alpha, 0, 10 ** 6).ok


def test_pending_marker_just_below_use():
    tree = Tree(5)
    alpha = "0000"
    beta = tree.z_sets(alpha)[0][0]
    got = believable(tree, {}, {beta: {4: (9, 2)}}, alpha, 0, 10)
    assert not got.ok and got.reason == "pending"
    assert believable(tree, {}, {beta: {4: (10, 2)}}, alpha, 0, 10).ok


# -- the four cases

def test_first_top_visit_defines_marker_zero():
    res = run(constant_scenario(2, 1))
    assert [e[1:] for e in res.events] == [("visit", "", {"outcome": ZERO}),
                                           ("extend", "", {"x": 0, "value": column_at_least("", 0)})]


def test_child_infinity_defines_k_then_lifts_the_marker():
    sc = Scenario(2, 3, {0: [0], 1: list(range(4))}, ())
    sim = Simulator(sc)
    sim.tree = Tree(2, [Label(0, 1, 0, 0), Label(0, 1, 0, 1)])
    for s in (1, 2):
        sim.stage(s)
    stage2 = [e for e in sim.events if e[0] == 2]
    assert ("k-define", "0", {"k": 0}) in [e[1:] for e in stage2]
    assert not any(e[1] in ("marker-enumerate", "correct") for e in stage2)
    marker = sim.deltas[""][0]
    sim.stage(3)
    lifted = [e for e in sim.events if e[1] == "marker-enumerate"]
    assert lifted and lifted[0][3]["value"] == marker and lifted[0][3]["set"] == 1
    assert marker in sim.members[1]
    # lifting x = 0 drops every larger marker too
    assert sim.deltas[""] == []


def correction_sim():
    fx = load("correction.json")
    sim = Simulator(Scenario.from_json(fx["scenario"]))
    for s in range(1, fx["inject"]["after_stage"] + 1):
        sim.stage(s)
    return fx, sim


def test_correction_fixture():
    fx, sim = correction_sim()
    assert {k: list(v) for k, v in sim.deltas.items() if v} == fx["markers_before"]
    inj = fx["inject"]
    sim.enumerate(inj["set"], inj["element"], inj["after_stage"])
    sim.stage(fx["stage"])
    got = [{"stage": s, "kind": k, "node": n, **d} for s, k, n, d in sim.events if s == fx["stage"]]
    assert json.loads(json.dumps(got)) == fx["expected_events"]
    assert {str(i): [list(p) for p in v] for i, v in enumerate(sim.V) if v} == fx["expected_V"]


def test_replay_decodes_corrected_and_untouched_arguments():
    fx, sim = correction_sim()
    inj = fx["inject"]
    sim.enumerate(inj["set"], inj["element"], inj["after_stage"])
    sim.stage(fx["stage"])
    res = finish(sim)
    assert replay_delta(res, "0", 0) == 1  # entered V_1, correction logged
    assert replay_delta(res, "", 0) == 0  # never enumerated, marker stable
    assert replay_delta(res, "0", 1) == "unsettled"  # lifted alongside 0, never redefined


# -- whole runs

def test_zero_stages():
    res = run(constant_scenario(3, 0))
    assert res.events == () and all(v == () for v in res.V) and res.tp == ("",)


def test_constant_feeds_never_injure():
    funcs = tuple(generate_scenario(0, 1, 1)[0].functionals)
    res = run(constant_scenario(4, 40, funcs))
    kinds = {e[1] for e in res.events}
    assert kinds == {"visit", "extend"}
    assert all(v == () for v in res.V)
    # markers of the visited top nodes only ever grow
    for tau, dl in res.deltas.items():
        ext = [e[3]["value"] for e in res.events if e[1] == "extend" and e[2] == tau]
        assert list(dl) == ext
    assert audit_markers(res).clean


def test_golden_log_is_reproduced():
    sc = Scenario.from_json(load("injury_golden.scenario.json"))
    lines = (FIXTURES / "injury_golden.log.jsonl").read_text().splitlines()
    first, second = run(sc), run(sc)
    assert first.log_lines() == lines == second.log_lines()
    assert first == second
    assert audit_markers(first).clean
    assert len(events_of(first, "diagonalize")) >= 1


def test_write_log_round_trip(tmp_path):
    from compred.io import read_log

    sc = Scenario.from_json(load("injury_golden.scenario.json"))
    res = run(sc)
    res.write_log(tmp_path / "run.jsonl")
    assert (tmp_path / "run.jsonl").read_text() == (FIXTURES / "injury_golden.log.jsonl").read_text()
    assert len(read_log(tmp_path / "run.jsonl")) == len(res.events)


def test_decreased_marker_is_flagged_at_its_stage():
    sc = Scenario.from_json(load("injury_golden.scenario.json"))
    res = run(sc)
    events = list(res.events)
    n, ev = next((n, e) for n, e in enumerate(events) if e[1] == "extend" and e[3]["x"] == 1)
    s, kind, node, data = ev
    events[n] = (s, kind, node, {**data, "value": 0})
    bad = audit_markers(dataclasses.replace(res, events=tuple(events)))
    assert not bad.clean
    assert bad.rule_i[0]["stage"] == s and bad.rule_i[0]["node"] == node


def test_dropped_marker_without_change_is_flagged():
    sc = Scenario.from_json(load("injury_golden.scenario.json"))
    res = run(sc)
    events = list(res.events)
    n = next(n for n, e in enumerate(events) if e[1] in ("correct", "marker-enumerate"))
    s, kind, node, data = events[n]
    events[n] = (s, kind, node, {**data, "value": 10 ** 9})
    bad = audit_markers(dataclasses.replace(res, events=tuple(events)))
    assert bad.rule_ii


@settings(max_examples=25)
@given(seeds, st.integers(1, 6), st.integers(0, 120), st.floats(0, 0.6))
def test_random_runs_are_deterministic_and_clean(seed, depth, stages, extra):
    sc, _ = generate_scenario(seed, depth, stages, extra_unbounded=extra)
    res = run(sc)
    assert res == run(sc)
    rep = audit_markers(res)
    assert rep.clean, rep.to_json()
    assert all(a <= b for a, b in zip(res.fresh_trace, res.fresh_trace[1:]))
    for i, v in enumerate(res.V):
        stages_seen = [t for _, t in v]
        assert stages_seen == sorted(stages_seen)
    order = [e[0] for e in res.events]
    assert order == sorted(order)


@pytest.mark.parametrize("seed", range(4))
def test_convergent_runs_settle(seed):
    S = 600
    sc, _ = generate_scenario(seed, 5, S, convergent=True)
    res = run(sc)
    assert audit_markers(res).clean
    counts = diagonalization_counts(res)
    assert all(c["last_stage"] <= S // 3 + 1 for c in counts.values())
    for tau in surviving_tops(res):
        rep = decode_check(res, tau)
        assert rep["wrong"] == 0, rep


def test_self_initialization_toggle_changes_only_the_bound():
    sc, _ = generate_scenario(7, 5, 200, extra_unbounded=0.3)
    a, b = run(sc), run(sc, include_self_inits=True)
    assert audit_markers(a).clean and audit_markers(b).clean
    assert b.include_self_inits and not a.include_self_inits


def test_scenario_validation():
    from compred.injury import ScenarioError

    with pytest.raises(ScenarioError, match="no feed"):
        Scenario(2, 3, {0: [0]}, ())
    with pytest.raises(ScenarioError, match="decreases"):
        Scenario(1, 3, {0: [2, 1]}, ())
    sc, R = generate_scenario(3, 4, 10)
    assert Scenario.from_json(sc.to_json()) == sc
    assert R.n >= sc.tree().indices()


def test_generated_feeds_follow_the_preorder():
    for seed in range(10):
        sc, R = generate_scenario(seed, 6, 300)
        tree = sc.tree()
        for level in range(6):
            lab = tree.labels[level]
            if not R(lab.i, lab.j):
                continue
            # related labels never get an unbounded feed
            assert sc.count(level, 300) <= 3
