"""Content-based scene-transition detection with cascading refinement.

The content curve is the mean absolute HSV difference between consecutive
frames; cuts fire where the curve crosses a threshold subject to a minimum
scene length, and later cascade passes re-scan inside each clip at lower
thresholds to catch soft transitions the strict pass missed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .core import VidcurateError


class SplitError(VidcurateError):
    pass


@dataclass(frozen=True)
class ClipBoundary:
    """Half-open frame range [start, end) of one clip."""

    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise SplitError(f"bad boundary [{self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start


def content_curve(series) -> np.ndarray:
    """Per-transition content values: index i is the difference between
    frames i and i+1, so the value for frame index t lives at t-1."""
    n = series.frame_count
    if n < 2:
        raise SplitError("content curve needs at least 2 frames")
    area = series.width * series.height
    values = np.empty(n - 1, dtype=np.float64)
    prev_hsv = kernels.rgb_to_hsv(series.frames[0])
    for i in range(1, n):
        cur_hsv = kernels.rgb_to_hsv(series.frames[i])
        sh, ss, sv = kernels.absdiff_channel_sums(prev_hsv, cur_hsv)
        values[i - 1] = (sh / area + ss / area + sv / area) / 3.0
        prev_hsv = cur_hsv
    return values


def detect_cuts(curve: np.ndarray, threshold: float, min_scene_len: int) -> list:
    """Scan left to right; a cut fires at frame t when curve[t-1] >= threshold
    and t is at least min_scene_len past the previous cut (initially 0)."""
    if threshold <= 0:
        raise SplitError(f"threshold must be > 0, got {threshold}")
    if min_scene_len < 1:
        raise SplitError(f"min_scene_len must be >= 1, got {min_scene_len}")
    cuts = []
    last = 0
    for t in range(1, len(curve) + 1):
        if curve[t - 1] >= threshold and t - last >= min_scene_len:
            cuts.append(t)
            last = t
    return cuts


def cuts_to_boundaries(cuts: Sequence[int], start: int, end: int, min_scene_len: int) -> list:
    """Turn local cuts into boundaries tiling [start, end); a trailing cut
    that would leave a tail shorter than min_scene_len is merged away."""
    cuts = list(cuts)
    if cuts and (end - start) - cuts[-1] < min_scene_len:
        cuts.pop()
    edges = [start] + [start + c for c in cuts] + [end]
    return [ClipBoundary(a, b) for a, b in zip(edges, edges[1:])]


def cascade_cuts(curve: np.ndarray, cascade: Sequence, n_frames: int) -> list:
    """Run the cascade over a precomputed curve; returns global cut indices."""
    _check_cascade(cascade)
    segments = [(0, n_frames)]
    for threshold, min_scene_len in cascade:
        refined = []
        for s, e in segments:
            local = detect_cuts(curve[s:e - 1], threshold, min_scene_len)
            bounds = cuts_to_boundaries(local, s, e, min_scene_len)
            refined.extend((b.start, b.end) for b in bounds)
        segments = refined
    return [s for s, _ in segments[1:]]


def cascade_split(series, cascade: Sequence) -> list:
    """Hierarchical refinement: the strict first pass runs on the whole
    series, each later pass re-runs detect_cuts inside every clip from the
    previous pass. Emitted boundaries partition [0, frame_count)."""
    curve = content_curve(series)
    n = series.frame_count
    cuts = cascade_cuts(curve, cascade, n)
    edges = [0] + cuts + [n]
    return [ClipBoundary(a, b) for a, b in zip(edges, edges[1:])]


def _check_cascade(cascade) -> None:
    if not cascade:
        raise SplitError("cascade must not be empty")
    thresholds = [t for t, _ in cascade]
    for a, b in zip(thresholds, thresholds[1:]):
        if b >= a:
            raise SplitError(f"cascade thresholds must strictly decrease, got {thresholds}")
    for t, m in cascade:
        if t <= 0:
            raise SplitError(f"cascade threshold must be > 0, got {t}")
        if m < 1:
            raise SplitError(f"cascade min_scene_len must be >= 1, got {m}")
