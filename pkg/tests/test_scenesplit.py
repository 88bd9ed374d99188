"""Cut detection traces, cascade refinement, and planted-cut recovery."""

import numpy as np
import pytest

from vidcurate.frameio import solid, synth_series, texture, segment_cuts
from vidcurate.scenesplit import (
    ClipBoundary,
    SplitError,
    cascade_cuts,
    cascade_split,
    content_curve,
    cuts_to_boundaries,
    detect_cuts,
)


class TestContentCurve:
    def test_identical_frames_zero(self):
        series = synth_series([solid((77, 12, 200), 2)], width=4, height=4)
        assert content_curve(series).tolist() == [0.0]

    def test_black_to_white_is_85(self):
        frames = np.zeros((2, 4, 4, 3), dtype=np.uint8)
        frames[1] = 255
        from vidcurate.frameio import FrameSeries

        series = FrameSeries(width=4, height=4, fps=8.0, frames=frames)
        assert content_curve(series).tolist() == [85.0]

    def test_constant_red_all_zero(self):
        series = synth_series([solid((255, 0, 0), 2), solid((255, 0, 0), 2)],
                              width=4, height=4)
        assert content_curve(series).tolist() == [0.0, 0.0, 0.0]

    def test_single_frame_rejected(self):
        series = synth_series([solid((1, 1, 1), 1)], width=4, height=4)
        with pytest.raises(SplitError):
            content_curve(series)

    def test_time_reversal_symmetry(self):
        rng = np.random.default_rng(4)
        from vidcurate.frameio import FrameSeries

        frames = rng.integers(0, 256, size=(7, 6, 6, 3), dtype=np.uint8)
        series = FrameSeries(width=6, height=6, fps=8.0, frames=frames)
        rev = FrameSeries(width=6, height=6, fps=8.0, frames=frames[::-1].copy())
        assert content_curve(series).tolist() == content_curve(rev)[::-1].tolist()


class TestDetectCuts:
    def test_spike_at_frame_three(self):
        assert detect_cuts(np.array([0, 0, 90, 0, 0.0]), 27, 2) == [3]

    def test_all_zero_curve(self):
        assert detect_cuts(np.zeros(10), 27, 2) == []

    def test_min_length_suppression(self):
        assert detect_cuts(np.array([90.0, 90, 90, 90]), 27, 2) == [2, 4]

    def test_threshold_inclusive(self):
        assert detect_cuts(np.array([0.0, 27.0, 0.0]), 27, 1) == [2]

    def test_lowering_threshold_never_removes_cuts(self):
        # exact superset property; min_scene_len=1 removes the suppression
        # interaction where an earlier low-threshold cut displaces a later one
        rng = np.random.default_rng(8)
        for _ in range(200):
            curve = rng.uniform(0, 60, size=40)
            hi = set(detect_cuts(curve, 30, 1))
            lo = set(detect_cuts(curve, 15, 1))
            assert hi <= lo

    def test_suppression_can_shift_cuts_at_lower_thresholds(self):
        # regression lock for the scan rule: the lower threshold fires early
        # and the min-length window then suppresses the spike at frame 3
        curve = np.array([0.0, 30.0, 90.0])
        assert detect_cuts(curve, 90, 2) == [3]
        assert detect_cuts(curve, 25, 2) == [2]


class TestBoundaries:
    def test_tail_merge(self):
        # cuts [2, 4] over 5 frames with min len 2 would leave a 1-frame tail
        bounds = cuts_to_boundaries([2, 4], 0, 5, 2)
        assert bounds == [ClipBoundary(0, 2), ClipBoundary(2, 5)]

    def test_no_merge_needed(self):
        bounds = cuts_to_boundaries([2], 0, 5, 2)
        assert bounds == [ClipBoundary(0, 2), ClipBoundary(2, 5)]


class TestCascade:
    def test_single_level_on_two_segments(self):
        series = synth_series([solid((255, 0, 0), 30), solid((0, 0, 255), 30)],
                              width=8, height=8)
        bounds = cascade_split(series, [(27.0, 15)])
        assert bounds == [ClipBoundary(0, 30), ClipBoundary(30, 60)]

    def test_second_pass_recovers_soft_transition(self):
        # hand-built curve: hard cut (90) at frame 30, soft one (25) at 45
        curve = np.zeros(59)
        curve[29] = 90.0
        curve[44] = 25.0
        cuts = cascade_cuts(curve, [(40.0, 15), (20.0, 8)], 60)
        assert cuts == [30, 45]

    def test_constant_series_single_clip(self):
        series = synth_series([solid((10, 20, 30), 40)], width=8, height=8)
        bounds = cascade_split(series, [(27.0, 15), (18.0, 8)])
        assert bounds == [ClipBoundary(0, 40)]

    def test_empty_cascade_rejected(self):
        series = synth_series([solid((1, 2, 3), 4)], width=4, height=4)
        with pytest.raises(SplitError):
            cascade_split(series, [])

    def test_non_decreasing_thresholds_rejected(self):
        series = synth_series([solid((1, 2, 3), 4)], width=4, height=4)
        with pytest.raises(SplitError):
            cascade_split(series, [(20.0, 5), (20.0, 3)])

    def test_partition_property_random_specs(self):
        rng = np.random.default_rng(55)
        palette = [(0, 0, 0), (255, 255, 255), (255, 0, 0), (0, 0, 255)]
        for _ in range(30):
            k = int(rng.integers(1, 6))
            segs = []
            prev = None
            for _ in range(k):
                choice = int(rng.integers(0, len(palette)))
                if prev is not None and palette[choice] == prev:
                    choice = (choice + 1) % len(palette)
                prev = palette[choice]
                segs.append(solid(prev, int(rng.integers(2, 40))))
            series = synth_series(segs, width=8, height=8)
            bounds = cascade_split(series, [(27.0, 15), (18.0, 8)])
            assert bounds[0].start == 0
            assert bounds[-1].end == series.frame_count
            for a, b in zip(bounds, bounds[1:]):
                assert a.end == b.start

    def test_planted_cut_recovery(self):
        # segments exceed min length, adjacent colors differ by >= 2x threshold
        segs = [solid((0, 0, 0), 35), solid((255, 255, 255), 40), solid((0, 0, 0), 31)]
        series = synth_series(segs, width=8, height=8)
        bounds = cascade_split(series, [(27.0, 15), (18.0, 8)])
        assert [b.start for b in bounds[1:]] == segment_cuts(segs)
