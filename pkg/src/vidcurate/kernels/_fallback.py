"""Vectorized NumPy implementations of the pixel kernels.

Arithmetic is integer-only so results are bit-identical to the compiled
extension: HSV uses round-half-up rational rounding, block matching uses
an encoded (sad, magnitude, dy, dx) key for exact tie-breaking.
"""

import numpy as np

BACKEND = "fallback"


def rgb_to_hsv(rgb):
    r = rgb[:, :, 0].astype(np.int32)
    g = rgb[:, :, 1].astype(np.int32)
    b = rgb[:, :, 2].astype(np.int32)

    mx = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    d = mx - mn

    mx_safe = np.maximum(mx, 1)
    s = np.where(mx > 0, (510 * d + mx) // (2 * mx_safe), 0)

    d_safe = np.maximum(d, 1)
    # branch priority on ties: red, then green, then blue
    is_r = mx == r
    is_g = ~is_r & (mx == g)
    n_r = (g - b) % (6 * d_safe)
    n_g = (b - r) + 2 * d
    n_b = (r - g) + 4 * d
    n = np.where(is_r, n_r, np.where(is_g, n_g, n_b))
    h = np.where(d > 0, (85 * n + d) // (2 * d_safe), 0)

    out = np.empty_like(rgb)
    out[:, :, 0] = h.astype(np.uint8)
    out[:, :, 1] = s.astype(np.uint8)
    out[:, :, 2] = mx.astype(np.uint8)
    return out


def absdiff_channel_sums(a, b):
    d = np.abs(a.astype(np.int32) - b.astype(np.int32))
    sums = d.sum(axis=(0, 1), dtype=np.int64)
    return int(sums[0]), int(sums[1]), int(sums[2])


def _block_sums(arr, block, nby, nbx):
    h = nby * block
    w = nbx * block
    trimmed = arr[:h, :w]
    return trimmed.reshape(nby, block, nbx, block).sum(axis=(1, 3), dtype=np.int64)


def block_displacements(prev, cur, block, radius):
    h, w = prev.shape
    nby = h // block
    nbx = w // block
    nb = nby * nbx

    p = prev.astype(np.int32)
    c = cur.astype(np.int32)

    best_key = np.full(nb, np.iinfo(np.int64).max, dtype=np.int64)
    best_dy = np.zeros(nb, dtype=np.int32)
    best_dx = np.zeros(nb, dtype=np.int32)

    by = np.repeat(np.arange(nby), nbx) * block
    bx = np.tile(np.arange(nbx), nby) * block

    for dy in range(-radius, radius + 1):
        oy0 = max(0, -dy)
        oy1 = h - max(0, dy)
        if oy1 - oy0 < 1:
            continue
        for dx in range(-radius, radius + 1):
            ox0 = max(0, -dx)
            ox1 = w - max(0, dx)
            if ox1 - ox0 < 1:
                continue
            diff = np.abs(p[oy0:oy1, ox0:ox1] - c[oy0 + dy:oy1 + dy, ox0 + dx:ox1 + dx])
            # integral image gives block sums at arbitrary alignment
            integral = np.zeros((diff.shape[0] + 1, diff.shape[1] + 1), dtype=np.int64)
            np.cumsum(diff, axis=0, out=integral[1:, 1:])
            np.cumsum(integral[1:, 1:], axis=1, out=integral[1:, 1:])

            valid = (by >= oy0) & (by + block <= oy1) & (bx >= ox0) & (bx + block <= ox1)
            y0 = by - oy0
            x0 = bx - ox0
            y0v = np.where(valid, y0, 0)
            x0v = np.where(valid, x0, 0)
            sad = (
                integral[y0v + block, x0v + block]
                - integral[y0v, x0v + block]
                - integral[y0v + block, x0v]
                + integral[y0v, x0v]
            )

            mag = dy * dy + dx * dx
            key = (
                (sad << 38)
                + (mag << 20)
                + ((dy + radius) << 10)
                + (dx + radius)
            )
            key = np.where(valid, key, np.iinfo(np.int64).max)

            better = key < best_key
            best_key = np.where(better, key, best_key)
            best_dy = np.where(better, dy, best_dy)
            best_dx = np.where(better, dx, best_dx)

    out = np.empty((nb, 2), dtype=np.int32)
    out[:, 0] = best_dy
    out[:, 1] = best_dx
    return out
