"""Built-in model behavior: shapes, ranges, determinism, judge rules."""

import numpy as np
import pytest

from vidcurate_sidecar.models import (
    EdgeOcr,
    LumaAesthetic,
    ModelError,
    PatternJudge,
    PixelEmbedder,
    StatCaptioner,
    build_embedder,
)


def frames(seed=0, n=8, size=32):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=(n, size, size, 3), dtype=np.uint8)


class TestPixelEmbedder:
    def test_dimension_and_norm(self):
        emb = PixelEmbedder(grid=4)
        assert emb.dim == 16
        v = emb.embed_frame(frames()[0])
        assert v.shape == (16,)
        assert abs(np.linalg.norm(v) - 1.0) < 1e-9

    def test_deterministic(self):
        emb = PixelEmbedder(grid=4)
        f = frames(5)[0]
        assert np.array_equal(emb.embed_frame(f), emb.embed_frame(f))
        assert np.array_equal(emb.embed_text("a dog"), emb.embed_text("a dog"))

    def test_similar_frames_score_high(self):
        emb = PixelEmbedder(grid=4)
        f = frames(7)[0]
        shifted = np.clip(f.astype(np.int16) + 5, 0, 255).astype(np.uint8)
        a, b = emb.embed_frame(f), emb.embed_frame(shifted)
        assert float(a @ b) > 0.95
        other = frames(8)[0]
        assert float(a @ emb.embed_frame(other)) < 0.9

    def test_flat_frame_unit_fallback(self):
        emb = PixelEmbedder(grid=4)
        flat = np.full((16, 16, 3), 100, np.uint8)
        v = emb.embed_frame(flat)
        assert v[0] == 1.0 and np.count_nonzero(v) == 1

    def test_text_embedding_differs_by_content(self):
        emb = PixelEmbedder(grid=4)
        a = emb.embed_text("a red car driving")
        b = emb.embed_text("green meadows at dawn")
        assert not np.array_equal(a, b)

    def test_bad_grid(self):
        with pytest.raises(ModelError):
            PixelEmbedder(grid=1)
        with pytest.raises(ModelError):
            build_embedder({"kind": "nope"})


class TestScalars:
    def test_aesthetic_range_and_determinism(self):
        model = LumaAesthetic()
        f = frames(2)
        score = model.score(f)
        assert 0.0 <= score <= 8.0
        assert model.score(f) == score

    def test_midgray_scores_higher_than_black(self):
        model = LumaAesthetic()
        rng = np.random.default_rng(0)
        mid = rng.integers(64, 192, size=(4, 32, 32, 3), dtype=np.uint8)
        black = np.zeros((4, 32, 32, 3), np.uint8)
        assert model.score(mid) > model.score(black)

    def test_ocr_edges(self):
        model = EdgeOcr()
        smooth = np.full((4, 32, 32, 3), 120, np.uint8)
        stripes = np.zeros((4, 32, 32, 3), np.uint8)
        stripes[:, :, ::2, :] = 255
        assert model.score(smooth) == 0.0
        assert model.score(stripes) > 0.05


class TestCaptioner:
    def test_terminated_and_deterministic(self):
        model = StatCaptioner()
        f = frames(3)
        caption = model.caption(f)
        assert caption.endswith(".")
        assert model.caption(f) == caption

    def test_reflects_brightness(self):
        model = StatCaptioner()
        dark = np.zeros((4, 16, 16, 3), np.uint8)
        bright = np.full((4, 16, 16, 3), 230, np.uint8)
        assert "dark" in model.caption(dark)
        assert "bright" in model.caption(bright)


class TestJudge:
    JUDGE = PatternJudge()

    def test_scene_transition(self):
        out = self.JUDGE.judge("A dog runs. The scene changes to a beach.")
        assert out == {"st": True, "flg": False, "redup": False, "eos_fail": False}

    def test_frame_level(self):
        text = "In the first frame a dog. In the next frame a cat."
        assert self.JUDGE.judge(text)["flg"] is True

    def test_redup_loop(self):
        text = "the dog runs fast " * 3 + "."
        assert self.JUDGE.judge(text)["redup"] is True

    def test_repeated_sentence(self):
        text = "Rain falls hard. The roof leaks. Rain falls hard."
        assert self.JUDGE.judge(text)["redup"] is True

    def test_eos_failure(self):
        text = " ".join(f"word{i}" for i in range(301))
        assert self.JUDGE.judge(text)["eos_fail"] is True
        assert self.JUDGE.judge(text + ".")["eos_fail"] is False

    def test_clean_caption(self):
        out = self.JUDGE.judge("A calm harbor at dawn with two boats.")
        assert out == {"st": False, "flg": False, "redup": False, "eos_fail": False}
