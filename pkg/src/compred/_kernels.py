"""Hot loops: multitape TM stepping and the build_f table recursion.

Each kernel exists twice: a plain-Python body (the reference path, run on
lists) and the same body compiled with ``numba.njit``.  Set
``COMPRED_NO_NUMBA=1`` to force the pure path; it is also used when numba
is not importable.
"""
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

__all__ = [
    "USE_NUMBA",
    "HALT",
    "TIMEOUT",
    "DIVERGE",
    "tm_loop",
    "tm_loop_python",
    "tm_loop_numba",
    "f_table",
    "f_table_python",
    "f_table_numba",
]

HALT = 0
TIMEOUT = 1
DIVERGE = 2

USE_NUMBA = numba is not None and os.environ.get("COMPRED_NO_NUMBA", "") not in ("1", "true", "yes")


def _tm_loop(next_state, write, move, halting, k, width, start, tapes, heads,
             budget, oracle, olen, qstate, ystate, nstate, qtape, origin):
    # tapes: k rows; heads: k positions (mutated in place)
    state = start
    steps = 0
    use = 0
    while True:
        if halting[state]:
            return HALT, steps, use, state
        if state == qstate:
            if steps >= budget:
                return TIMEOUT, steps, use, state
            pos = 0
            while tapes[qtape][origin + pos] == 1:
                pos += 1
            if pos >= olen:
                return DIVERGE, steps, use, state
            if pos + 1 > use:
                use = pos + 1
            if oracle[pos] == 1:
                state = ystate
            else:
                state = nstate
            steps += 1
            continue
        idx = 0
        mul = 1
        for t in range(k):
            idx += tapes[t][heads[t]] * mul
            mul *= 3
        row = state * width + idx
        ns = next_state[row]
        if ns < 0:
            return HALT, steps, use, state
        if steps >= budget:
            return TIMEOUT, steps, use, state
        for t in range(k):
            tapes[t][heads[t]] = write[row][t]
            heads[t] += move[row][t]
        state = ns
        steps += 1


def _f_table(labels, horizon, out):
    # labels[t][x] = least element of x's block at stage t (t clamped by caller)
    last = len(labels) - 1
    n = len(labels[0])
    for col in range(horizon):
        for x in range(n):
            stage = x if x > col else col
            if stage > last:
                stage = last
            r = labels[stage][x]
            if r < x:
                out[x][col] = out[r][col]
            else:
                out[x][col] = x


def tm_loop_python(next_state, write, move, halting, k, width, start, tapes, heads,
                   budget, oracle, olen, qstate, ystate, nstate, qtape, origin):
    """Pure path: same body as the compiled kernel, run over Python lists."""
    tl = [row.tolist() for row in tapes]
    hl = heads.tolist()
    res = _tm_loop(next_state.tolist(), write.tolist(), move.tolist(), halting.tolist(),
                   k, width, start, tl, hl, budget, oracle.tolist(), olen,
                   qstate, ystate, nstate, qtape, origin)
    for t in range(k):
        tapes[t, :] = tl[t]
        heads[t] = hl[t]
    return res


def f_table_python(labels, horizon):
    out = [[0] * horizon for _ in range(labels.shape[1])]
    _f_table(labels.tolist(), horizon, out)
    return np.array(out, dtype=np.int64).reshape(labels.shape[1], horizon)


if numba is not None:
    _tm_loop_jit = numba.njit(cache=True)(_tm_loop)
    _f_table_jit = numba.njit(cache=True)(_f_table)

    def tm_loop_numba(next_state, write, move, halting, k, width, start, tapes, heads,
                      budget, oracle, olen, qstate, ystate, nstate, qtape, origin):
        return _tm_loop_jit(next_state, write, move, halting, k, width, start, tapes, heads,
                            budget, oracle, olen, qstate, ystate, nstate, qtape, origin)

    def f_table_numba(labels, horizon):
        out = np.zeros((labels.shape[1], horizon), dtype=np.int64)
        _f_table_jit(labels, horizon, out)
        return out
else:  # pragma: no cover
    tm_loop_numba = tm_loop_python
    f_table_numba = f_table_python


if USE_NUMBA:
    tm_loop = tm_loop_numba
    f_table = f_table_numba
else:
    tm_loop = tm_loop_python
    f_table = f_table_python
