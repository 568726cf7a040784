"""Compare the numba kernels with the pure-Python path on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Outputs of both paths are compared before any timing is reported.
"""
import argparse
import random
import time

import numpy as np

from compred import _kernels
from compred.machina import library
from compred.machina.machine import BLANK
from compred.machina.padding import encode_pair
from compred.relcore import random_schedule


def tm_args(m, inp, budget):
    c = m.table
    origin = budget + 2
    tapes = np.full((m.tapes, 2 * budget + len(inp) + 4), BLANK, dtype=np.int8)
    tapes[0, origin:origin + len(inp)] = np.frombuffer(inp.encode(), dtype=np.uint8) - 48
    heads = np.full(m.tapes, origin, dtype=np.int64)
    orc = np.zeros(0, dtype=np.int8)
    return (c["next_state"], c["write"], c["move"], c["halting"], m.tapes, m.width,
            c["index"][m.start], tapes, heads, budget, orc, 0,
            c["qstate"], c["ystate"], c["nstate"], c["qtape"], origin)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_tm(repeat):
    cases = [("addition", library.addition(), encode_pair(300, 300), 10 ** 5),
             ("palindrome", library.palindrome(), "0110" * 60 + "0110"[::-1] * 60, 10 ** 6)]
    for name, m, inp, budget in cases:
        def go(kernel):
            args = tm_args(m, inp, budget)
            res = kernel(*args)
            return res, args[7].tobytes()
        go(_kernels.tm_loop_numba)  # compile outside the timing
        t_py, out_py = best_of(lambda: go(_kernels.tm_loop_python), repeat)
        t_nb, out_nb = best_of(lambda: go(_kernels.tm_loop_numba), repeat)
        assert out_py[0] == out_nb[0] and out_py[1] == out_nb[1], f"{name}: paths disagree"
        print(f"tm_loop  {name:<11} steps={out_nb[0][1]:>7}  python {t_py * 1e3:9.2f} ms"
              f"  numba {t_nb * 1e3:8.2f} ms  x{t_py / t_nb:6.1f}")


def bench_f_table(repeat):
    rng = random.Random(0)
    for n, stages in ((12, 60), (200, 400)):
        labels = random_schedule(rng, n, stages).labels()
        horizon = max(n, stages) + 1
        _kernels.f_table_numba(labels, horizon)
        t_py, out_py = best_of(lambda: _kernels.f_table_python(labels, horizon), repeat)
        t_nb, out_nb = best_of(lambda: _kernels.f_table_numba(labels, horizon), repeat)
        assert np.array_equal(out_py, out_nb), "f_table paths disagree"
        print(f"f_table  n={n:<4} H={horizon:<4}      python {t_py * 1e3:9.2f} ms"
              f"  numba {t_nb * 1e3:8.2f} ms  x{t_py / t_nb:6.1f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels.numba is None:
        raise SystemExit("numba is not importable; nothing to compare")
    bench_tm(args.repeat)
    bench_f_table(args.repeat)


if __name__ == "__main__":
    main()
