"""Compare the numba-compiled kernels against the uncompiled fallback.

Run: python benchmarks/bench_kernels.py [--pairs 2000] [--tokens 10] [--repeat 3]
"""

import argparse
import time

import numpy as np

from versealign import kernels


def bench_transport(pairs: int, tokens: int, repeat: int, rng) -> None:
    instances = []
    for _ in range(pairs):
        m, n = rng.integers(2, tokens + 1, 2)
        wa = rng.random(m) + 0.05
        wa /= wa.sum()
        wb = rng.random(n) + 0.05
        wb /= wb.sum()
        instances.append((wa, wb, rng.random((m, n))))

    kernels.transport_simplex_nb(*instances[0])  # compile outside the timing

    timings = {}
    for label, solve in (
        ("numba", kernels.transport_simplex_nb),
        ("python", kernels.transport_simplex_py),
    ):
        best = float("inf")
        for _ in range(repeat):
            start = time.perf_counter()
            for wa, wb, cost in instances:
                solve(wa, wb, cost)
            best = min(best, time.perf_counter() - start)
        timings[label] = best
        print(f"transport  {label:>7}: {best * 1000:9.1f} ms  ({pairs} solves)")
    print(f"transport  speedup: {timings['python'] / timings['numba']:.1f}x")


def bench_cooccurrence(lines: int, tokens: int, vocab: int, repeat: int, rng) -> None:
    flat = []
    offsets = [0]
    for _ in range(lines):
        flat.extend(rng.integers(0, vocab, rng.integers(4, tokens + 1)).tolist())
        offsets.append(len(flat))
    token_ids = np.array(flat, dtype=np.int64)
    offset_arr = np.array(offsets, dtype=np.int64)

    warm = np.zeros((vocab, vocab))
    kernels.accumulate_cooccurrence_nb(token_ids, offset_arr, 5, warm)

    timings = {}
    for label, accumulate in (
        ("numba", kernels.accumulate_cooccurrence_nb),
        ("python", kernels.accumulate_cooccurrence_py),
    ):
        best = float("inf")
        for _ in range(repeat):
            counts = np.zeros((vocab, vocab))
            start = time.perf_counter()
            accumulate(token_ids, offset_arr, 5, counts)
            best = min(best, time.perf_counter() - start)
        timings[label] = best
        print(f"cooccur    {label:>7}: {best * 1000:9.1f} ms  ({lines} lines)")
    print(f"cooccur    speedup: {timings['python'] / timings['numba']:.1f}x")


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--pairs", type=int, default=2000)
    parser.add_argument("--tokens", type=int, default=10)
    parser.add_argument("--lines", type=int, default=5000)
    parser.add_argument("--vocab", type=int, default=800)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if kernels.transport_simplex_nb is None:
        raise SystemExit("numba unavailable: nothing to compare")
    rng = np.random.default_rng(0)
    print(f"active backend flag: {kernels.BACKEND}")
    bench_transport(args.pairs, args.tokens, args.repeat, rng)
    bench_cooccurrence(args.lines, args.tokens, args.vocab, args.repeat, rng)


if __name__ == "__main__":
    main()
