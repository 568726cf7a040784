import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from compred.machina import library
from compred.machina.machine import (ClockedTM, MalformedMachine, MultiTapeTM, run, run_trace,
                                     run_with_oracle, value_of)
from compred.machina.padding import (StepCapExceeded, curried_machine, curry_index, encode_pair,
                                     eval_G, fit_quadratic_constant, pad_p, parse_pad,
                                     step_count_h)

bitstrings = st.text("01", max_size=24)


def g_direct(g, x, n):
    out, _ = run(g, encode_pair(x, n), 10 ** 6)
    return value_of(out)


# -- plain runs

@given(bitstrings)
def test_echo_halts_at_once(w):
    out, steps = run(library.echo(), w, 10)
    assert out == w and steps <= len(w) + 1


@pytest.mark.parametrize("budget", [1, 7, 100])
def test_loop_times_out_at_budget(budget):
    assert run(library.loop(), "101", budget) == (None, budget)


def test_palindrome_on_random_strings():
    rng = random.Random(5)
    words = ["".join(rng.choice("01") for _ in range(rng.randint(0, 16))) for _ in range(20)]
    words += ["0110", "1001", "10"]
    for w in words:
        out, _ = run(library.palindrome(), w, 10 ** 4)
        assert out == ("1" if w == w[::-1] else "0"), w


@given(bitstrings)
def test_palindrome_property(w):
    out, _ = run(library.palindrome(), w, 10 ** 4)
    assert value_of(out) == (w == w[::-1])


def test_budget_must_be_positive():
    with pytest.raises(ValueError):
        run(library.echo(), "1", 0)


@pytest.mark.parametrize("transitions, states, why", [
    ([("a", "1", "h", "1", "R"), ("a", "*", "h", "0", "S")], ("a", "h"), "nondeterministic"),
    ([("a", "1", "zz", "1", "R")], ("a", "h"), "unknown state"),
    ([("a", "11", "h", "1", "R")], ("a", "h"), "pattern"),
    ([("a", "1", "h", "1", "X")], ("a", "h"), "write/move"),
    ([("h", "1", "a", "1", "R")], ("a", "h"), "halting"),
])
def test_malformed_tables_are_rejected(transitions, states, why):
    with pytest.raises(MalformedMachine, match=why):
        MultiTapeTM(1, states, "a", {"h"}, transitions)


def test_machine_json_round_trip():
    for m in (library.palindrome(), library.bit_functional(2, negate=True), library.addition()):
        back = MultiTapeTM.from_json(m.to_json())
        assert back == m


@given(st.text("01", max_size=10), st.integers(1, 200))
def test_trace_is_deterministic_and_matches_run(w, budget):
    m = library.palindrome()
    first = run_trace(m, w, budget)
    assert first == run_trace(m, w, budget)
    out, steps = run(m, w, budget)
    assert len(first) - 1 == steps


# -- oracle runs

def test_oracle_ignoring_machine_has_zero_use():
    r = run_with_oracle(library.const_functional(1), "111", [], 100)
    assert r.converged and r.value == 1 and r.use == 0


def test_query_at_position_five_has_use_six():
    m = library.bit_functional(0)
    r = run_with_oracle(m, "11111", [0, 0, 0, 0, 0, 1], 100)
    assert r.converged and r.value == 1 and r.use == 6
    assert run_with_oracle(m, "11111", [0] * 5, 100).status == "diverge"


@given(st.integers(0, 8), st.integers(0, 3), st.booleans(),
       st.lists(st.integers(0, 1), max_size=14), st.lists(st.integers(0, 1), max_size=6))
def test_use_monotonicity(l, offset, negate, prefix, extra):
    m = library.bit_functional(offset, negate)
    r = run_with_oracle(m, "1" * l, prefix, 500)
    assert r.use <= r.steps + 1
    if r.converged:
        again = run_with_oracle(m, "1" * l, prefix + extra, 500)
        assert again == r
        assert run_with_oracle(m, "1" * l, prefix[:r.use], 500) == r


# -- step counts and pads

def test_constant_time_g_has_constant_h():
    g = library.reject_all()
    assert {step_count_h(g, n) for n in range(10)} == {1}


@pytest.mark.parametrize("g", [library.projection(), library.addition()])
def test_h_nondecreasing_and_reads_input(g):
    hs = [step_count_h(g, n) for n in range(33)]
    assert all(a <= b for a, b in zip(hs, hs[1:]))
    assert all(h >= n for n, h in enumerate(hs))


def test_step_cap_names_the_input():
    with pytest.raises(StepCapExceeded, match=r"\(3,3\)"):
        step_count_h(library.loop(), 3, cap=50)


def test_pads():
    g = library.projection()
    assert pad_p(g, 0) == "0" + "1" * step_count_h(g, 0)
    pads = [pad_p(g, y) for y in range(33)]
    assert all(len(p) == y + 1 + step_count_h(g, y) for y, p in enumerate(pads))
    assert len(set(pads)) == len(pads)
    assert all(parse_pad(p) == (y, step_count_h(g, y)) for y, p in enumerate(pads))


# -- G

@pytest.mark.parametrize("g", [library.projection(), library.addition()])
def test_G_on_pads_is_g(g):
    for x in range(9):
        for n in range(9):
            r = eval_G(g, pad_p(g, x), pad_p(g, n))
            assert r.well_formed and r.value == g_direct(g, x, n)


@given(st.text("01", max_size=12), st.integers(0, 6))
def test_G_malformed_second_argument_is_zero(junk, x):
    g = library.addition()
    b = junk if parse_pad(junk) is None else junk + "0"
    assert eval_G(g, pad_p(g, x), b).value == 0


@given(st.integers(0, 8), st.integers(0, 60))
def test_G_pad_check_stays_within_claimed_length(x, z):
    g = library.addition()
    a = encode_pair(x, z)
    b = pad_p(g, 1)
    r = eval_G(g, a, b)
    if z != step_count_h(g, x):
        assert r.value == 0 and not r.well_formed
        # parsing plus a check of g(x, x) cut at z steps
        assert r.steps <= len(a) + len(b) + z


def test_G_quadratic_constant_holds_past_the_fit():
    g = library.addition()

    def samples(lo, hi):
        for x in range(lo, hi):
            for n in range(lo, hi):
                a, b = pad_p(g, x), pad_p(g, n)
                yield len(a) + len(b), eval_G(g, a, b).steps

    c = fit_quadratic_constant(samples(0, 6))
    assert 0 < c < 1
    assert all(steps <= c * size * size for size, steps in samples(6, 10))


def test_fit_is_max_ratio():
    assert fit_quadratic_constant([(2, 4), (3, 18), (0, 5)]) == 2.0


# -- clocked and curried machines

@given(st.integers(1, 4), st.sampled_from(["const", "linear", "quadratic", "poly:3"]),
       st.text("01", max_size=6))
def test_clock_cuts_off(c, tag, w):
    m = ClockedTM(library.loop(), c, tag)
    out, steps, cut = m.run(w)
    assert cut and out == "" and m.value(w) == 0
    assert steps == m.budget(len(w)) == c * m.h(len(w)) + c


@pytest.mark.parametrize("g", [library.projection(), library.addition()])
def test_curried_machine_equals_G(g):
    for x in range(5):
        w = pad_p(g, x)
        cm = curry_index(g, w)
        for n in range(5):
            v = pad_p(g, n)
            assert cm.value(v) == g_direct(g, x, n) == eval_G(g, w, v).value
            assert not cm.run(v)[2]


@given(st.text("01", max_size=14))
def test_curried_machine_malformed_input_is_zero(v):
    g = library.addition()
    cm = curry_index(g, pad_p(g, 2))
    assert cm.value(v) == eval_G(g, pad_p(g, 2), v).value
    if not eval_G(g, pad_p(g, 2), v).well_formed:
        assert cm.value(v) == 0


def test_curried_rows_with_equal_G_rows_agree():
    g = library.reject_all()  # g is 0 everywhere, so every w gives the zero row
    words = [pad_p(g, 0), pad_p(g, 3), "", "1101"]
    grid = [pad_p(g, n) for n in range(5)] + ["", "0", "10", "0111"]
    rows = [[curry_index(g, w).value(v) for v in grid] for w in words]
    assert all(r == rows[0] for r in rows)
    assert len({curry_index(g, w).index for w in words}) == len(words)


def test_curry_index_is_injective_on_words():
    g = library.projection()
    words = ["", "0", "1", "00", "01", "10", "11", pad_p(g, 1), pad_p(g, 2)]
    assert len({curry_index(g, w).index for w in words}) == len(words)


@pytest.mark.parametrize("g", [library.projection(), library.addition(), library.reject_all()])
def test_row_equality_transfers_to_padded_rows(g):
    grid = range(5)
    for x in grid:
        for y in grid:
            same_g = all(g_direct(g, x, n) == g_direct(g, y, n) for n in grid)
            same_G = all(eval_G(g, pad_p(g, x), pad_p(g, n)).value
                         == eval_G(g, pad_p(g, y), pad_p(g, n)).value for n in grid)
            assert same_g == same_G


def test_curried_machine_needs_oracle_free_g():
    with pytest.raises(ValueError):
        curried_machine(library.bit_functional(0), "0")
