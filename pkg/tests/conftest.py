"""Shared corpus builders for pipeline and acceptance tests."""

import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from vidcurate.config import CurationConfig, ScorerSettings, load_default_lexicons
from vidcurate.frameio import fser_write, solid, synth_series, texture

ECHO_CMD = (sys.executable, "-m", "vidcurate.echo_scorer", "--dim", "16")

PALETTE = [(0, 0, 0), (255, 255, 255), (200, 30, 30), (30, 30, 200), (230, 220, 40)]


def build_corpus(root: Path, n_files: int, segments_per_file: int,
                 *, seg_len: int = 60, width: int = 64, height: int = 64,
                 seed: int = 100) -> int:
    """Write synthetic FSER sources; returns the planted clip count.

    Segments alternate solid colors (static, motion_low fodder) with slowly
    translating coarse textures (kept fodder); adjacent segments always
    differ enough to split reliably at the default cascade.
    """
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    total = 0
    for i in range(n_files):
        segments = []
        for j in range(segments_per_file):
            if (i + j) % 3 == 0:
                color = PALETTE[int(rng.integers(0, len(PALETTE)))]
                segments.append(solid(color, seg_len))
            else:
                dy = int(rng.integers(0, 2))
                dx = 1
                segments.append(texture(seg_len, shift=(dy, dx), cell=16))
        series = synth_series(segments, width=width, height=height, fps=8.0,
                              seed=seed * 1000 + i)
        fser_write(series, root / f"src{i:04d}.fser")
        total += segments_per_file
    return total


def e2e_config(fser_dir: Path, *, sample_target: int = 8, workers: int = 1,
               scorer=ECHO_CMD) -> CurationConfig:
    cfg = CurationConfig(
        aesthetic_min=4.5,
        ocr_max=0.03,
        tc_min=0.75,
        motion_lo=0.0005,
        motion_hi=0.05,
        clip_score_min=0.2,
        sample_target=sample_target,
        eos_len_cap=60,
        fser_dir=str(fser_dir),
        workers=workers,
        scorer=ScorerSettings(cmd=tuple(scorer), timeout_s=60.0, window=32),
    )
    return load_default_lexicons(cfg)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus-small")
    fser_dir = root / "fser"
    planted = build_corpus(fser_dir, n_files=6, segments_per_file=4,
                           seg_len=40, width=32, height=32)
    return {"fser_dir": fser_dir, "planted_clips": planted, "root": root}
