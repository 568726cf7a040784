import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from compred.machina import library
from compred.pi1 import (DeltaTwoApprox, UniversalG, approx_Fn, build_f, decide_window, diagonal_L,
                         diagonal_L_machine, diagonal_witness, f_table, pair, rows_decide, universal_g,
                         unpair)
from compred.relcore import PartitionSchedule, random_schedule, stage_relation, verify_reduction

from conftest import schedules, seeds


def naive_f(sched, x, n):
    """Oracle: the recursion written directly against the stage relation."""
    rel = stage_relation(sched, max(x, n))
    r = next(r for r in range(x + 1) if rel(r, x))
    return naive_f(sched, r, n) if r < x else x


def identity_schedule(n, length=3):
    return PartitionSchedule.constant(n, [[x] for x in range(n)], length)


def complete_schedule(n, length=3):
    return PartitionSchedule.constant(n, [range(n)], length)


def test_pairing_small_values():
    assert pair(0, 0) == 0
    assert (pair(1, 0), pair(0, 1)) == (1, 2)


def test_pairing_round_trip():
    codes = set()
    for i in range(100):
        for x in range(100):
            z = pair(i, x)
            assert unpair(z) == (i, x)
            codes.add(z)
    assert len(codes) == 100 * 100


@given(st.integers(0, 10 ** 12))
def test_unpair_always_succeeds(z):
    assert pair(*unpair(z)) == z


def test_build_f_identity_and_complete():
    for x in range(6):
        for n in range(8):
            assert build_f(identity_schedule(6), x, n) == x
            assert build_f(complete_schedule(6), x, n) == 0


@given(schedules())
def test_build_f_matches_naive_recursion(sched):
    H = decide_window(sched) + 2
    table = f_table(sched, H)
    for x in range(sched.n):
        for n in range(H):
            assert table(x, n) == naive_f(sched, x, n)


@given(schedules())
def test_build_f_is_block_minimum_after_stabilizing(sched):
    least = {x: b[0] for b in sched.limit() for x in b}
    for x in range(sched.n):
        for k in range(max(sched.stable_from, x), max(sched.stable_from, x) + 4):
            assert build_f(sched, x, k) == least[x]


@given(schedules())
def test_build_f_stays_in_block_and_below_x(sched):
    table = f_table(sched, decide_window(sched) + 2)
    for x in range(sched.n):
        for n in range(table.horizon):
            v = table(x, n)
            assert v <= x
            # every link of the recursion chain sits at a stage >= n
            assert stage_relation(sched, n)(v, x)
            if x <= n:
                assert stage_relation(sched, max(x, n))(v, x)


def test_build_f_can_leave_the_stage_block_when_x_exceeds_n():
    # 4 links to 2 at stage 4, and 2 links to 1 at the coarser stage 2;
    # 1 and 4 are already apart at stage 4.
    sched = PartitionSchedule(8, [[[0], [1, 2, 3, 4, 5, 7], [6]]] * 4
                              + [[[0], [1, 3, 5, 7], [2, 4], [6]]], 4)
    assert build_f(sched, 4, 0) == naive_f(sched, 4, 0) == 1
    assert not stage_relation(sched, 4)(1, 4)
    assert stage_relation(sched, 0)(1, 4)


def test_rows_decide_examples():
    s = identity_schedule(5)
    w = decide_window(s)
    assert rows_decide(s, 3, 3, w)
    assert not any(rows_decide(s, x, y, w) for x in range(5) for y in range(5) if x != y)
    with pytest.raises(ValueError):
        rows_decide(s, 0, 1, w - 1)


@pytest.mark.parametrize("seed", range(60))
def test_rows_decide_exhaustive_on_small_universes(seed):
    rng = random.Random(seed)
    sched = random_schedule(rng, rng.randint(1, 10), rng.randint(0, 40))
    lim = sched.limit_relation()
    w = decide_window(sched)
    for x in range(sched.n):
        for y in range(sched.n):
            assert rows_decide(sched, x, y, w) == (x == y or lim.related(x, y))
            assert rows_decide(sched, x, y, w + 7) == rows_decide(sched, x, y, w)


def test_universal_g_identity_family():
    fam = [identity_schedule(5)]
    for x in range(5):
        for n in range(4):
            assert universal_g(fam, pair(0, x), n) == x


@given(st.lists(schedules(max_n=6, max_stages=12), min_size=1, max_size=4))
def test_pairing_reduces_each_member(family):
    G = UniversalG(family)
    for i, s in enumerate(family):
        assert verify_reduction(lambda x, i=i: pair(i, x), s.limit_relation(), G.related, s.n).ok


@given(schedules(max_n=8))
def test_two_copies_of_one_schedule(sched):
    G = UniversalG([sched, sched])
    lim = sched.limit_relation()
    for x in range(sched.n):
        for y in range(sched.n):
            same_rows = all(naive_f(sched, x, n) == naive_f(sched, y, n) for n in range(G.window + 1))
            assert G.related(pair(0, x), pair(1, y)) == same_rows == (x == y or lim.related(x, y))


def test_sink_rows_are_separate():
    fam = [identity_schedule(3), complete_schedule(2)]
    G = UniversalG(fam)
    assert G.sink(0) != G.sink(1) and G.sink(5) != G.sink(6)
    assert G(pair(1, 7), 0) == G.sink(1)
    assert G(pair(4, 0), 0) == G.sink(4)
    assert not G.related(pair(4, 0), pair(0, 0))
    assert G.related(pair(4, 0), pair(4, 9))
    real = {int(v) for i, s in enumerate(fam) for x in range(s.n) for v in G.row(pair(i, x))}
    assert G.sink(0) not in real and G.sink(1) not in real


@given(schedules())
def test_approximations_refine(sched):
    table = f_table(sched, decide_window(sched) + 1)
    n_pts = sched.n
    for n in range(table.horizon + 1):
        rel = np.array([[approx_Fn(table, n, x, y) for y in range(n_pts)] for x in range(n_pts)])
        assert rel.diagonal().all() and (rel == rel.T).all()
        assert ((rel.astype(int) @ rel.astype(int) > 0) <= rel).all()
        if n == 0:
            assert rel.all()
        if n < table.horizon:
            nxt = np.array([[approx_Fn(table, n + 1, x, y) for y in range(n_pts)] for x in range(n_pts)])
            assert (nxt <= rel).all()
    w = decide_window(sched)
    for x in range(n_pts):
        for y in range(n_pts):
            assert approx_Fn(table, table.horizon, x, y) == rows_decide(sched, x, y, w, table)
    with pytest.raises(ValueError):
        approx_Fn(table, table.horizon + 1, 0, 0)


def test_diagonal_all_ones_is_empty():
    f = DeltaTwoApprox(np.ones((3, 3, 5)))
    phi = {pair(2, s): s % 3 for s in range(8)}
    assert diagonal_L(f, phi, 2, 4) == set()


def test_diagonal_first_case_prefers_first_pair():
    bits = np.ones((3, 3, 4), dtype=np.int8)
    bits[0, 1, 2] = bits[1, 0, 2] = 0  # x=0, y=1 separate at t=2
    bits[0, 2, 3] = bits[2, 0, 3] = 0  # x, z separate at v=3
    bits[1, 2, 1] = bits[2, 1, 1] = 0  # y, z separate earlier, at v=1
    phi = {pair(1, 0): 0, pair(1, 1): 1, pair(1, 2): 0, pair(1, 3): 2, pair(1, 4): 2}
    f = DeltaTwoApprox(bits)
    assert diagonal_witness(f, phi, 1, 3) == (2, 0, 1, 2)
    assert diagonal_L(f, phi, 1, 3) == {(pair(1, 1), pair(1, 4))}
    bits[0, 2, 0] = bits[2, 0, 0] = 0
    assert diagonal_L(DeltaTwoApprox(bits), phi, 1, 3) == {(pair(1, 0), pair(1, 4))}


@st.composite
def gadget_instances(draw):
    rng = random.Random(draw(seeds))
    m, T, e = rng.randint(2, 5), rng.randint(2, 8), rng.randint(0, 4)
    cls = [rng.randrange(m) for _ in range(m)]
    bits = np.ones((m, m, T), dtype=np.int8)
    for x in range(m):
        for y in range(x + 1, m):
            if cls[x] != cls[y]:
                z = rng.sample(range(T), rng.randint(1, T))
                bits[x, y, z] = bits[y, x, z] = 0
    max_stage = rng.randint(0, T - 1)
    phi = {pair(e, s): rng.randrange(m) for s in range(max_stage + 3)}
    return DeltaTwoApprox(bits), cls, phi, e, max_stage


@given(gadget_instances())
def test_diagonal_output_is_a_single_column_pair(inst):
    f, cls, phi, e, max_stage = inst
    out = diagonal_L(f, phi, e, max_stage)
    assert len(out) <= 1
    for a, b in out:
        assert unpair(a)[0] == unpair(b)[0] == e
        assert a != b
        assert cls[phi[a]] != cls[phi[b]]


def test_diagonal_machine_wrapper_reads_machine_values():
    # echo outputs its input, so phi(code) = code: x = 0, y = 2, z = 5 at t = 0
    m = 12
    bits = np.ones((m, m, 3), dtype=np.int8)
    bits[0, 2, 0] = bits[2, 0, 0] = 0
    bits[0, 5, 1] = bits[5, 0, 1] = 0
    f = DeltaTwoApprox(bits)
    assert diagonal_L_machine(f, library.echo(), 0, 1, 500) == {(pair(0, 0), pair(0, 2))}
    assert diagonal_L_machine(f, library.loop(), 0, 1, 500) == set()


def test_small_schedule_report_matches_hand_oracle(fixtures_dir):
    import json

    raw = json.loads((fixtures_dir / "schedule_small.json").read_text())
    report = json.loads((fixtures_dir / "schedule_small.report.json").read_text())
    stages = raw["stages"]

    def related(t, u, v):
        if u == v or u > t or v > t:
            return True
        part = stages[min(t, len(stages) - 1)]
        return any(u in b and v in b for b in part)

    def f(x, n):
        r = min(r for r in range(x + 1) if related(max(x, n), r, x))
        return f(r, n) if r < x else x

    H = report["horizon"]
    assert report["f_table"] == [[f(x, n) for n in range(H)] for x in range(raw["n"])]
    assert report["limit_blocks"] == [[0, 4], [1, 5], [2], [3]]
    assert report["ok"] and report["mismatches"] == []
