#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Run from the repo root after building the extension:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from vidcurate.kernels import _fallback

try:
    from vidcurate.kernels import _native
except ImportError:
    _native = None


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench():
    rng = np.random.default_rng(0)
    frame = rng.integers(0, 256, size=(256, 256, 3), dtype=np.uint8)
    frame2 = rng.integers(0, 256, size=(256, 256, 3), dtype=np.uint8)
    gray = rng.integers(0, 256, size=(256, 256), dtype=np.uint8)
    gray2 = np.roll(gray, (3, -2), axis=(0, 1))

    cases = [
        ("rgb_to_hsv 256x256", lambda impl: impl.rgb_to_hsv(frame)),
        ("absdiff_sums 256x256", lambda impl: impl.absdiff_channel_sums(frame, frame2)),
        ("block_match 256x256 b16 r4",
         lambda impl: impl.block_displacements(gray, gray2, 16, 4)),
        ("block_match 256x256 b16 r8",
         lambda impl: impl.block_displacements(gray, gray2, 16, 8)),
    ]

    print(f"{'kernel':<30} {'fallback ms':>12} {'native ms':>12} {'speedup':>9}")
    for name, call in cases:
        t_fb = timeit(call, _fallback) * 1000
        if _native is not None:
            t_nat = timeit(call, _native) * 1000
            print(f"{name:<30} {t_fb:>12.2f} {t_nat:>12.2f} {t_fb / t_nat:>8.1f}x")
        else:
            print(f"{name:<30} {t_fb:>12.2f} {'n/a':>12} {'n/a':>9}")

    # agreement spot check alongside the numbers
    if _native is not None:
        assert np.array_equal(_native.rgb_to_hsv(frame), _fallback.rgb_to_hsv(frame))
        assert _native.absdiff_channel_sums(frame, frame2) == _fallback.absdiff_channel_sums(
            frame, frame2
        )
        assert np.array_equal(
            _native.block_displacements(gray, gray2, 16, 4),
            _fallback.block_displacements(gray, gray2, 16, 4),
        )
        print("\nbackends agree bit-for-bit on all benchmark inputs")


if __name__ == "__main__":
    bench()
