"""Coarse-curation signals: cosine math, category assignment, motion proxy.

Aesthetic and OCR scores are ingest-only (score files or the scorer
protocol); embeddings likewise arrive from outside. Motion has a built-in
block-matching proxy so the pipeline runs without any external model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .core import VidcurateError
from .frameio import FrameSeries, to_gray


class TaggingError(VidcurateError):
    pass


class MissingSignalError(TaggingError):
    """A required tagging input is unavailable for a clip."""


@dataclass(frozen=True, eq=False)
class Embedding:
    """Fixed-dimension real vector with its Euclidean norm cached."""

    values: np.ndarray
    norm: float = None  # type: ignore[assignment]

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise TaggingError(f"embedding must be a nonempty vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise TaggingError("embedding contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "norm", float(np.linalg.norm(arr)))

    @property
    def dim(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class CategoryDef:
    label: str
    prompt: str
    embedding: Embedding


def cosine(a: Embedding, b: Embedding) -> float:
    """dot(a, b) / (|a| |b|), clamped to [-1, 1] against rounding."""
    if a.dim != b.dim:
        raise TaggingError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.norm == 0.0 or b.norm == 0.0:
        raise TaggingError("cosine undefined for zero-norm vector")
    value = float(np.dot(a.values, b.values)) / (a.norm * b.norm)
    return max(-1.0, min(1.0, value))


def temporal_consistency(first: Embedding, last: Embedding) -> float:
    """Cosine similarity between a clip's first and last frame embeddings."""
    return cosine(first, last)


def mean_embedding(embeddings: Sequence[Embedding]) -> Embedding:
    if not embeddings:
        raise TaggingError("mean of zero embeddings")
    dim = embeddings[0].dim
    for e in embeddings[1:]:
        if e.dim != dim:
            raise TaggingError(f"dimension mismatch: {e.dim} vs {dim}")
    stacked = np.stack([e.values for e in embeddings])
    return Embedding(stacked.mean(axis=0))


def assign_category(frame_embs: Sequence[Embedding], categories: Sequence[CategoryDef]):
    """Average the initial/middle/final frame embeddings and return the
    (label, similarity) of the closest category; ties go to the
    lexicographically smallest label."""
    if len(frame_embs) != 3:
        raise TaggingError(f"expected exactly 3 frame embeddings, got {len(frame_embs)}")
    if not categories:
        raise TaggingError("empty category list")
    labels = [c.label for c in categories]
    if len(set(labels)) != len(labels):
        raise TaggingError("category labels must be unique")
    mean = mean_embedding(frame_embs)
    if mean.norm == 0.0:
        raise TaggingError("zero-norm mean embedding")
    best_label = None
    best_sim = -2.0
    for cat in sorted(categories, key=lambda c: c.label):
        sim = cosine(mean, cat.embedding)
        if sim > best_sim:
            best_label = cat.label
            best_sim = sim
    return best_label, best_sim


def motion_proxy(series: FrameSeries, block: int, radius: int, stride: int) -> float:
    """Block-matching optical-flow proxy, dimensionless per-frame fraction.

    Frames are paired (t, t+stride) for t = 0, stride, 2*stride, ...;
    per pair the mean best-match displacement magnitude over block tiles
    is divided by the stride; the score is the mean over pairs divided by
    the frame diagonal.
    """
    if stride < 1:
        raise TaggingError(f"stride must be >= 1, got {stride}")
    n = series.frame_count
    if n <= stride:
        raise TaggingError(f"series of {n} frames too short for stride {stride}")
    if block > min(series.width, series.height):
        raise TaggingError(f"block {block} exceeds frame geometry")
    grays = {}

    def gray(t):
        if t not in grays:
            grays[t] = to_gray(series.frames[t])
        return grays[t]

    pair_motions = []
    t = 0
    while t + stride < n:
        disp = kernels.block_displacements(gray(t), gray(t + stride), block, radius)
        mags = np.hypot(disp[:, 0].astype(np.float64), disp[:, 1].astype(np.float64))
        pair_motions.append(float(mags.mean()) / stride)
        grays.pop(t, None)
        t += stride
    diagonal = math.sqrt(series.width**2 + series.height**2)
    return float(np.mean(pair_motions)) / diagonal


@dataclass
class TagInputs:
    """Signals gathered for one clip before TagSet assembly."""

    aesthetic: Optional[float] = None
    ocr: Optional[float] = None
    emb_first: Optional[Embedding] = None
    emb_mid: Optional[Embedding] = None
    emb_last: Optional[Embedding] = None
    motion: Optional[float] = None  # ingested score overrides the proxy
    series: Optional[FrameSeries] = None


def assemble_tagset(clip_id, *, aesthetic, ocr, emb_first, emb_mid, emb_last,
                    motion, motion_source, categories):
    """Build a TagSet from fully resolved signals; clip_score stays absent."""
    from .core import TagSet

    label, sim = assign_category([emb_first, emb_mid, emb_last], categories)
    return TagSet(
        aesthetic=aesthetic,
        ocr=ocr,
        temporal_consistency=temporal_consistency(emb_first, emb_last),
        category=label,
        category_sim=sim,
        motion=motion,
        motion_source=motion_source,
    )


def build_tagset(clip_id, inputs: TagInputs, categories: Sequence[CategoryDef], *,
                 block: int = 16, radius: int = 4, stride: int = 8):
    """Assemble a TagSet from ingested and computed signals.

    Raises MissingSignalError naming the clip and the missing field when a
    required signal is neither ingested nor computable. An ingested motion
    score overrides the block-matching proxy.
    """

    def require(name, value):
        if value is None:
            raise MissingSignalError(f"missing signal: {name} for {clip_id}")
        return value

    aesthetic = require("aesthetic", inputs.aesthetic)
    ocr = require("ocr", inputs.ocr)
    emb_first = require("emb_first", inputs.emb_first)
    emb_mid = require("emb_mid", inputs.emb_mid)
    emb_last = require("emb_last", inputs.emb_last)

    if inputs.motion is not None:
        motion = inputs.motion
        motion_source = "ingested"
    elif inputs.series is not None:
        motion = motion_proxy(inputs.series, block, radius, stride)
        motion_source = "proxy"
    else:
        raise MissingSignalError(f"missing signal: motion for {clip_id}")

    return assemble_tagset(
        clip_id,
        aesthetic=aesthetic,
        ocr=ocr,
        emb_first=emb_first,
        emb_mid=emb_mid,
        emb_last=emb_last,
        motion=motion,
        motion_source=motion_source,
        categories=categories,
    )
