"""Time the compiled window counter against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--lengths 10000 100000] [--repeat 3]

Both backends are run on the same seeded words; their counts must agree.
"""
from __future__ import annotations

import argparse
import json
import random
import time

import numpy as np

from artifact import kernels
from artifact.toeplitz import (EpochSchedule, ToeplitzParams, build_rates, period_exponents,
                               toeplitz_letters)


def inputs(length: int, seed: int) -> dict:
    rng = random.Random(seed)
    rates = build_rates(ToeplitzParams(3, 3, 2, 4, 2), EpochSchedule.build(4, 5, reach=40), 12)
    P = period_exponents(rates.n, 12, cap=8)
    return {
        "random-4": np.array([rng.randrange(4) for _ in range(length)], dtype=np.int32),
        "toeplitz": np.asarray(toeplitz_letters(P, length, seed), dtype=np.int32),
    }


def best_of(fn, repeat: int) -> tuple:
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lengths", type=int, nargs="+", default=[10_000, 100_000])
    ap.add_argument("--windows", type=int, nargs="+", default=[5, 25, 125])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled kernel not built; only the Python backend is timed")
    rows = []
    for L in args.lengths:
        for name, word in inputs(L, args.seed).items():
            bounds = [0, L]
            for n in args.windows:
                tp, rp = best_of(lambda: kernels.count_windows(word, bounds, n, backend="python"),
                                 args.repeat)
                row = {"input": name, "length": L, "n": n, "distinct": rp[0], "python_s": tp}
                if kernels.BACKEND == "cython":
                    tc, rc = best_of(
                        lambda: kernels.count_windows(word, bounds, n, backend="cython"),
                        args.repeat)
                    if rc != rp:
                        raise SystemExit(f"backends disagree on {name} L={L} n={n}: {rc} != {rp}")
                    row.update(cython_s=tc, speedup=tp / tc if tc > 0 else float("inf"))
                rows.append(row)
                print(f"{name:>9} L={L:<7} n={n:<4} distinct={rp[0]:<7} python={tp * 1e3:8.2f} ms"
                      + (f"  cython={row['cython_s'] * 1e3:8.2f} ms  x{row['speedup']:.1f}"
                         if "cython_s" in row else ""))
    print(json.dumps({"backend": kernels.BACKEND, "rows": len(rows)}))


if __name__ == "__main__":
    main()
