"""Pixel kernels with backend selection at import.

The compiled extension is preferred; the NumPy fallback is used when the
extension is unavailable or when VIDCURATE_PURE=1 is set. Both backends
produce bit-identical results (integer arithmetic only); the benchmark in
benchmarks/bench_kernels.py compares their throughput.
"""

import os

import numpy as np

from . import _fallback

if os.environ.get("VIDCURATE_PURE") == "1":
    _impl = _fallback
else:
    try:
        from . import _native as _impl
    except ImportError:
        _impl = _fallback

BACKEND = _impl.BACKEND

MAX_BLOCK = 256
MAX_RADIUS = 255


def _check_frame(frame, name):
    if not isinstance(frame, np.ndarray) or frame.dtype != np.uint8:
        raise TypeError(f"{name} must be a uint8 ndarray")
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError(f"{name} must have shape (h, w, 3), got {frame.shape}")


def rgb_to_hsv(frame):
    """Hexcone RGB -> HSV on 8-bit data, H scaled to the full 0-255 range.

    Gray pixels (max == min) get H = 0 and S = 0 by convention.
    """
    _check_frame(frame, "frame")
    return _impl.rgb_to_hsv(np.ascontiguousarray(frame))


def absdiff_channel_sums(a, b):
    """Per-channel sums of absolute differences between two frames."""
    _check_frame(a, "a")
    _check_frame(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"frame shapes differ: {a.shape} vs {b.shape}")
    return _impl.absdiff_channel_sums(np.ascontiguousarray(a), np.ascontiguousarray(b))


def block_displacements(prev, cur, block, radius):
    """Best integer displacement per non-overlapping block of `prev` in `cur`.

    Minimizes the sum of absolute differences over [-radius, radius]^2;
    ties break by smallest magnitude, then smallest dy, then dx. Candidate
    windows falling outside the frame are skipped; (0, 0) is always valid.
    Returns int32 array (n_blocks, 2) of (dy, dx) in row-major block order.
    """
    for name, arr in (("prev", prev), ("cur", cur)):
        if not isinstance(arr, np.ndarray) or arr.dtype != np.uint8 or arr.ndim != 2:
            raise TypeError(f"{name} must be a 2-d uint8 ndarray")
    if prev.shape != cur.shape:
        raise ValueError(f"frame shapes differ: {prev.shape} vs {cur.shape}")
    h, w = prev.shape
    if not 1 <= block <= min(h, w):
        raise ValueError(f"block {block} outside [1, {min(h, w)}]")
    if block > MAX_BLOCK:
        raise ValueError(f"block {block} exceeds supported maximum {MAX_BLOCK}")
    if not 1 <= radius <= MAX_RADIUS:
        raise ValueError(f"radius {radius} outside [1, {MAX_RADIUS}]")
    return _impl.block_displacements(
        np.ascontiguousarray(prev), np.ascontiguousarray(cur), block, radius
    )
