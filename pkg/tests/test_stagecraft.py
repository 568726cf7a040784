from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from compred.machina import library
from compred.machina.machine import ClockedTM, run
from compred.machina.padding import encode_pair
from compred.pi1 import pair
from compred.stagecraft import (CapExceeded, REFeed, SegmentFeed, Lx_tail, ece_window,
                                linear_Lx_member, run_splitting, settling_check, split_g,
                                supersparse_A_member, supersparse_f)


@st.composite
def feeds(draw, horizon=30, max_elem=40):
    elems = draw(st.lists(st.integers(0, max_elem), unique=True, max_size=15))
    stages = sorted(draw(st.lists(st.integers(0, horizon), min_size=len(elems), max_size=len(elems))))
    return REFeed(tuple(zip(elems, stages)), horizon)


@st.composite
def segment_feeds(draw, horizon=30, max_cols=5):
    cols = {}
    for k in range(draw(st.integers(0, max_cols))):
        steps = draw(st.lists(st.integers(0, 3), min_size=horizon + 1, max_size=horizon + 1))
        seq, total = [], 0
        for d in steps:
            total += d
            seq.append(total)
        cols[k] = seq
    return SegmentFeed(cols, horizon)


def changes(feed, horizon):
    return {s for _, s in feed.events if 0 < s <= horizon}


# -- feeds

def test_feed_invariants_are_enforced():
    with pytest.raises(ValueError, match="nondecreasing"):
        REFeed(((1, 3), (2, 1)), 5)
    with pytest.raises(ValueError, match="twice"):
        REFeed(((1, 1), (1, 2)), 5)
    with pytest.raises(ValueError, match="monotone"):
        SegmentFeed({0: [2, 1]}, 3)


@given(feeds())
def test_feed_round_trip_and_prefixes(feed):
    assert REFeed.from_json(feed.to_json()) == feed
    for s in range(feed.horizon):
        assert feed.upto(s) <= feed.upto(s + 1)
    assert feed.upto(feed.horizon) == {a for a, _ in feed.events}


# -- L_x

def test_Lx_empty_feeds_accept_everything():
    empty = REFeed((), 20)
    assert all(Lx_tail(empty, empty, 20))


def test_Lx_finite_and_cofinite():
    S = REFeed(((0, 1), (1, 2)), 40)
    T = REFeed(tuple((a, a) for a in range(5, 41)), 40)
    tail = Lx_tail(S, T, 40)
    assert not any(tail[5:])
    assert all(Lx_tail(T, S, 40)[5:])


@given(feeds(), feeds(), st.integers(0, 30))
def test_Lx_rule_and_length_only(S, T, n):
    latest = max(changes(S, n) | changes(T, n), default=0)
    expected = latest == 0 or S.changed_at(latest)
    assert linear_Lx_member(S, T, "0" * n) == expected
    assert linear_Lx_member(S, T, "1" * n) == expected


# -- supersparse

def test_supersparse_iterates():
    h = library.projection()
    assert supersparse_f(h, 0) == 0
    vals = [supersparse_f(h, n) for n in range(6)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    for a, b in zip(vals, vals[1:]):
        assert run(h, encode_pair(a, a), 10 ** 7)[1] == b
    with pytest.raises(CapExceeded):
        supersparse_f(h, 5, cap=1000)


def test_supersparse_needs_growing_h():
    with pytest.raises(ValueError, match="h\\(m\\)"):
        supersparse_f(library.reject_all(), 3)


def test_supersparse_support_and_reject_adversary():
    h = library.projection()
    vals = {supersparse_f(h, n) for n in range(5)}
    reject = [ClockedTM(library.reject_all(), 2, "linear")]
    for m in range(341):
        assert supersparse_A_member(h, reject, "0" * m) == (m in vals)


def test_supersparse_beats_each_adversary():
    h = library.projection()
    advs = [ClockedTM(m, 4, "linear") for m in (library.accept_all(), library.reject_all(),
                                                 library.even_length())]
    beaten = set()
    for k in range(2 * len(advs)):
        w = "0" * supersparse_f(h, k)
        for i, adv in enumerate(advs):
            if supersparse_A_member(h, advs, w) != bool(adv.value(w)):
                beaten.add(i)
    assert beaten == set(range(len(advs)))


# -- splitting

def test_split_g_examples():
    const = SegmentFeed({0: [3] * 11}, 10)
    grow = SegmentFeed({0: list(range(11))}, 10)
    assert all(split_g(const, 0, s) == 0 for s in range(11))
    assert all(split_g(grow, 0, s) == s for s in range(11))
    with pytest.raises(ValueError):
        split_g(grow, 0, 11)


@given(segment_feeds(), st.integers(0, 5), st.integers(0, 30))
def test_split_g_matches_reverse_scan(P, k, s):
    last = [t for t in range(s + 1) if t == 0 or P.length(k, t - 1) != P.length(k, t)]
    assert split_g(P, k, s) == max(last)


def test_splitting_examples():
    A = REFeed(tuple((a, a + 1) for a in range(10)), 12)
    assert set(run_splitting(A, SegmentFeed({0: [4] * 13, 1: [2] * 13}, 12)).E_part) == set(range(10))
    split = run_splitting(A, SegmentFeed({0: list(range(13))}, 12))
    assert set(split.F_part) == set(range(10))


@given(feeds(), segment_feeds())
def test_splitting_partitions_A_at_every_stage(A, P):
    split = run_splitting(A, P)
    prev_E, prev_F = set(), set()
    for s in range(max(A.horizon, P.horizon) + 1):
        E, F = split.at(s)
        assert not E & F
        assert E | F == A.upto(s)
        assert prev_E <= E and prev_F <= F
        prev_E, prev_F = E, F


@given(feeds(max_elem=25), segment_feeds(), st.integers(0, 4))
def test_settling(A, P, k):
    rep = settling_check(A, P, k)
    assert rep["mismatches"] == []


def test_settling_checks_something():
    A = REFeed(tuple((a, 12 + a) for a in range(10)), 30)
    P = SegmentFeed({0: [1] * 31, 1: list(range(31))}, 30)
    rep = settling_check(A, P, 1)
    assert rep["r"] == 0 and rep["checked"] > 0 and rep["mismatches"] == []


# -- almost-equality windows

@given(feeds())
def test_ece_equal_feeds(W):
    for kind in ("E0", "E1", "E2", "E3"):
        rep = ece_window(W, W, kind, W.horizon)
        assert rep.no_difference_seen and rep.label == "approximation at horizon"
    assert ece_window(W, W, "E2", W.horizon).data["partial_sum"] == 0


def test_ece_partial_sum_is_exact():
    Wi = REFeed(((1, 0), (2, 1), (3, 1)), 5)
    Wj = REFeed(((3, 0), (4, 2)), 5)
    assert ece_window(Wi, Wj, "E2", 5).data["partial_sum"] == Fraction(7, 4)
    assert ece_window(Wi, Wj, "E0", 5).data == {"size": 3, "difference": [1, 2, 4]}


def test_ece_zero_is_left_out_of_the_sum():
    Wi = REFeed(((0, 0),), 2)
    rep = ece_window(Wi, REFeed((), 2), "E2", 2)
    assert rep.data["partial_sum"] == 0 and rep.no_difference_seen


def test_ece_column_views():
    Wi = REFeed(((pair(3, 5), 0), (pair(1, 1), 0)), 4)
    Wj = REFeed(((pair(1, 1), 1), (pair(3, 6), 3)), 4)
    assert ece_window(Wi, Wj, "E1", 4).data == {"columns": [3]}
    assert ece_window(Wi, Wj, "E3", 4).data == {"column_sizes": {3: 2}}
    assert ece_window(Wi, Wj, "E1", 0).data == {"columns": [1, 3]}
    with pytest.raises(ValueError):
        ece_window(Wi, Wj, "E9", 4)
