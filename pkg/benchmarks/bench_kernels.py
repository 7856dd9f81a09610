#!/usr/bin/env python3
"""Benchmark the pairwise accumulation kernel implementations.

Compares the compiled Cython kernel, the blocked numpy fallback and a
naive pure-Python double loop on the cross-product accumulation that
dominates a large evaluation run:

    python benchmarks/bench_kernels.py --sizes 200,500,1000 --dim 64
"""

import argparse
import math
import time

import numpy as np

from mlmbias import kernels
from mlmbias.kernels import _fallback


def naive_python(emb_m, emb_f, aula_m, aula_f):
    num, den = [], []
    rows_m = emb_m.tolist()
    rows_f = emb_f.tolist()
    a_m = aula_m.tolist()
    a_f = aula_f.tolist()
    for i, row_m in enumerate(rows_m):
        for j, row_f in enumerate(rows_f):
            weight = sum(x * y for x, y in zip(row_m, row_f))
            den.append(weight)
            if a_m[i] > a_f[j]:
                num.append(weight)
    return math.fsum(num), math.fsum(den)


def _case(rng, n, dim):
    emb_m = rng.normal(size=(n, dim))
    emb_f = rng.normal(size=(n, dim))
    emb_m /= np.linalg.norm(emb_m, axis=1, keepdims=True)
    emb_f /= np.linalg.norm(emb_f, axis=1, keepdims=True)
    return emb_m, emb_f, rng.normal(size=n), rng.normal(size=n)


def _time(fn, case, repeats):
    best = math.inf
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*case)
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="200,500,1000",
                        help="comma-separated sentence counts per gender")
    parser.add_argument("--dim", type=int, default=64, help="embedding dimension")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--skip-naive-above", type=int, default=500,
                        help="skip the pure-Python loop beyond this size")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    sizes = [int(s) for s in args.sizes.split(",")]
    impls = [("numpy", _fallback.mbe_accumulate)]
    if kernels.HAVE_NATIVE:
        impls.insert(0, ("native", kernels._native.mbe_accumulate))
    else:
        print("note: native kernel not built; comparing numpy vs naive only")

    header = f"{'n x n':>12} | " + " | ".join(f"{name:>10}" for name, _ in impls + [("naive", None)])
    print(header)
    print("-" * len(header))
    for n in sizes:
        case = _case(rng, n, args.dim)
        cells = []
        reference = None
        for name, fn in impls:
            elapsed, result = _time(fn, case, args.repeats)
            if reference is None:
                reference = result
            else:
                assert abs(result[0] - reference[0]) < 1e-6
                assert abs(result[1] - reference[1]) < 1e-6
            cells.append(f"{elapsed * 1e3:9.2f}ms")
        if n <= args.skip_naive_above:
            elapsed, result = _time(naive_python, case, 1)
            assert abs(result[1] - reference[1]) < 1e-6
            cells.append(f"{elapsed * 1e3:9.2f}ms")
        else:
            cells.append("   skipped")
        print(f"{n:>5} x {n:<5}| " + " | ".join(f"{c:>10}" for c in cells))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
