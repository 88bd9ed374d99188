# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pixel kernels: HSV conversion, channel diff sums, block matching.

Must stay bit-identical to _fallback.py; all arithmetic is integer-only.
"""

from libc.stdint cimport int32_t, int64_t, uint8_t

import numpy as np

BACKEND = "native"


def rgb_to_hsv(const uint8_t[:, :, ::1] rgb):
    cdef Py_ssize_t h = rgb.shape[0]
    cdef Py_ssize_t w = rgb.shape[1]
    out_arr = np.empty((h, w, 3), dtype=np.uint8)
    cdef uint8_t[:, :, ::1] out = out_arr
    cdef Py_ssize_t y, x
    cdef int r, g, b, mx, mn, d, n, hh, ss

    for y in range(h):
        for x in range(w):
            r = rgb[y, x, 0]
            g = rgb[y, x, 1]
            b = rgb[y, x, 2]
            mx = r if r >= g else g
            if b > mx:
                mx = b
            mn = r if r <= g else g
            if b < mn:
                mn = b
            d = mx - mn
            if mx > 0:
                ss = (510 * d + mx) // (2 * mx)
            else:
                ss = 0
            if d > 0:
                if mx == r:
                    n = g - b
                    if n < 0:
                        n += 6 * d
                elif mx == g:
                    n = (b - r) + 2 * d
                else:
                    n = (r - g) + 4 * d
                hh = (85 * n + d) // (2 * d)
            else:
                hh = 0
            out[y, x, 0] = <uint8_t> hh
            out[y, x, 1] = <uint8_t> ss
            out[y, x, 2] = <uint8_t> mx
    return out_arr


def absdiff_channel_sums(const uint8_t[:, :, ::1] a, const uint8_t[:, :, ::1] b):
    cdef Py_ssize_t h = a.shape[0]
    cdef Py_ssize_t w = a.shape[1]
    cdef int64_t s0 = 0, s1 = 0, s2 = 0
    cdef Py_ssize_t y, x
    cdef int d

    for y in range(h):
        for x in range(w):
            d = a[y, x, 0] - b[y, x, 0]
            s0 += d if d >= 0 else -d
            d = a[y, x, 1] - b[y, x, 1]
            s1 += d if d >= 0 else -d
            d = a[y, x, 2] - b[y, x, 2]
            s2 += d if d >= 0 else -d
    return s0, s1, s2


def block_displacements(const uint8_t[:, ::1] prev, const uint8_t[:, ::1] cur,
                        int block, int radius):
    cdef Py_ssize_t h = prev.shape[0]
    cdef Py_ssize_t w = prev.shape[1]
    cdef Py_ssize_t nby = h // block
    cdef Py_ssize_t nbx = w // block
    out_arr = np.zeros((nby * nbx, 2), dtype=np.int32)
    cdef int32_t[:, ::1] out = out_arr
    cdef Py_ssize_t by, bx, i, j, idx
    cdef Py_ssize_t y0, x0, yy, xx
    cdef int dy, dx, d
    cdef int64_t sad, best_sad, mag, best_mag
    cdef int best_dy, best_dx, better

    idx = 0
    for by in range(nby):
        y0 = by * block
        for bx in range(nbx):
            x0 = bx * block
            best_sad = -1
            best_mag = 0
            best_dy = 0
            best_dx = 0
            for dy in range(-radius, radius + 1):
                yy = y0 + dy
                if yy < 0 or yy + block > h:
                    continue
                for dx in range(-radius, radius + 1):
                    xx = x0 + dx
                    if xx < 0 or xx + block > w:
                        continue
                    sad = 0
                    for i in range(block):
                        for j in range(block):
                            d = prev[y0 + i, x0 + j] - cur[yy + i, xx + j]
                            sad += d if d >= 0 else -d
                    mag = dy * dy + dx * dx
                    if best_sad < 0:
                        better = 1
                    elif sad != best_sad:
                        better = sad < best_sad
                    elif mag != best_mag:
                        better = mag < best_mag
                    elif dy != best_dy:
                        better = dy < best_dy
                    else:
                        better = dx < best_dx
                    if better:
                        best_sad = sad
                        best_mag = mag
                        best_dy = dy
                        best_dx = dx
            out[idx, 0] = best_dy
            out[idx, 1] = best_dx
            idx += 1
    return out_arr
