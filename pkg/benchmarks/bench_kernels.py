"""Benchmark the compiled kernel extension against the pure-Python twin.

Two views:
  * microbenchmarks call both backends directly in-process;
  * the end-to-end search benchmark re-runs this script in a subprocess with
    BLOCKEQ_PURE=1 so the engine itself imports the other backend.

Usage: python benchmarks/bench_kernels.py [--skip-subprocess]
"""

import argparse
import os
import random
import subprocess
import sys
import time


def _bench(fn, *args, repeat=5, number=2000):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def micro():
    from blockeq import _kernels_py

    try:
        from blockeq import _kernels_c
    except ImportError:
        print("compiled kernels not built; microbenchmarks need them")
        return

    rng = random.Random(0)
    a6 = tuple(rng.randint(-9, 9) for _ in range(36))
    b6 = tuple(rng.randint(-9, 9) for _ in range(36))
    big = tuple(rng.randint(-(10**30), 10**30) for _ in range(36))

    rows = [
        ("mat_mul 6x6 (small ints)",
         lambda k: k.mat_mul(6, 6, a6, 6, b6)),
        ("mat_mul 6x6 (30-digit ints)",
         lambda k: k.mat_mul(6, 6, big, 6, big)),
        ("row_add 6x6",
         lambda k: k.row_add(a6, 6, 6, 1, 4, -1)),
        ("col_add 6x6",
         lambda k: k.col_add(a6, 6, 6, 2, 5, 1)),
    ]
    print(f"{'kernel':34s} {'python':>12s} {'compiled':>12s} {'speedup':>9s}")
    for label, call in rows:
        tp = _bench(call, _kernels_py)
        tc = _bench(call, _kernels_c)
        print(f"{label:34s} {tp * 1e6:10.2f}us {tc * 1e6:10.2f}us {tp / tc:8.2f}x")


def search_case():
    """A fixed heavy witness-recovery instance; prints backend and timing."""
    from blockeq import KERNEL_BACKEND, SL, decide_blocked_equivalence
    from blockeq.intmat import IntMatrix
    from blockeq.poset_block import (
        BlockShape,
        BlockedMatrix,
        chain_poset,
        generator_moves,
        move_matrix,
    )

    rng = random.Random(7)
    shape = BlockShape.square(chain_poset(3), (2, 2, 2))
    moves = generator_moves(shape, SL)
    ent = [[0] * 6 for _ in range(6)]
    poset = shape.poset
    for i in poset.elements():
        for j in poset.elements():
            if poset.leq(i, j):
                for r in shape.row_range(i):
                    for c in shape.col_range(j):
                        ent[r][c] = rng.randint(-2, 2)
    a = BlockedMatrix(shape, IntMatrix.from_rows(ent))
    u = IntMatrix.identity(6)
    v = IntMatrix.identity(6)
    for _ in range(6):
        g = move_matrix(moves[rng.randrange(len(moves))], 6)
        if rng.random() < 0.5:
            u = g * u
        else:
            v = v * g
    b = BlockedMatrix(shape, u * a.matrix * v)
    t0 = time.perf_counter()
    verdict = decide_blocked_equivalence(a, b, group=SL)
    dt = time.perf_counter() - t0
    assert verdict.is_yes
    print(
        f"search backend={KERNEL_BACKEND:7s} verdict={verdict.status} "
        f"nodes={verdict.report.nodes_expanded} time={dt:.3f}s"
    )


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--search-only", action="store_true")
    parser.add_argument("--skip-subprocess", action="store_true")
    args = parser.parse_args()

    if args.search_only:
        search_case()
        return

    micro()
    print()
    search_case()
    if not args.skip_subprocess:
        env = dict(os.environ, BLOCKEQ_PURE="1")
        subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--search-only"],
            env=env,
            check=True,
        )


if __name__ == "__main__":
    main()
