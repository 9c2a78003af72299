"""Compare the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Covers the two hot paths: seeded softmax attention synthesis (the mock
backend's per-sentence and per-step tensors) and LCS length (ROUGE-L's
inner loop). Prints a table of per-call medians and the speedup.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from agenticsum._kernels import _pykernels

try:
    from agenticsum._kernels import _ckernels
except ImportError:
    _ckernels = None


def time_call(fn, repeats: int) -> float:
    """Median seconds per call."""
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def benchmark(repeats: int) -> list[tuple[str, float, float | None]]:
    rng = np.random.default_rng(0)
    long_a = rng.integers(0, 50, size=2000).tolist()
    long_b = rng.integers(0, 50, size=2000).tolist()

    cases = [
        (
            "hashed_softmax_attention H=8 T=128",
            lambda mod: mod.hashed_softmax_attention(42, 8, 128),
        ),
        (
            "hashed_softmax_attention H=4 T=512",
            lambda mod: mod.hashed_softmax_attention(42, 4, 512),
        ),
        (
            "hashed_uniform 1M cells",
            lambda mod: mod.hashed_uniform(7, (1024, 1024)),
        ),
        (
            "lcs_length 2000x2000 tokens",
            lambda mod: mod.lcs_length(long_a, long_b),
        ),
    ]

    rows = []
    for name, call in cases:
        py = time_call(lambda: call(_pykernels), repeats)
        c = time_call(lambda: call(_ckernels), repeats) if _ckernels else None
        rows.append((name, py, c))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if _ckernels is None:
        print("compiled kernels unavailable; timing the fallback only\n")

    rows = benchmark(args.repeats)
    header = f"{'case':<38} {'python':>10} {'compiled':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, py, c in rows:
        if c is None:
            print(f"{name:<38} {py * 1e3:>8.2f}ms {'-':>10} {'-':>8}")
        else:
            print(
                f"{name:<38} {py * 1e3:>8.2f}ms {c * 1e3:>8.2f}ms "
                f"{py / c:>7.1f}x"
            )


if __name__ == "__main__":
    main()
