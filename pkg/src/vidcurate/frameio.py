"""FSER frame-series container and synthetic series generation.

FSER is the bit-exact binary format visual analysis consumes: a 20-byte
little-endian header (magic "FSER", u32 version, u32 frame_count,
u16 width, u16 height, f32 fps) followed by raw 8-bit RGB frames.
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .core import VidcurateError

MAGIC = b"FSER"
VERSION = 1
_HEADER = struct.Struct("<4sIIHHf")
HEADER_SIZE = _HEADER.size  # 20 bytes


class FrameFormatError(VidcurateError):
    """Malformed FSER file or invalid frame geometry."""


@dataclass(eq=False)
class FrameSeries:
    """Decoded clip pixels at fixed geometry: frames is (n, h, w, 3) uint8."""

    width: int
    height: int
    fps: float
    frames: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise FrameFormatError(f"geometry must be >= 1, got {self.width}x{self.height}")
        if not self.fps > 0:
            raise FrameFormatError(f"fps must be > 0, got {self.fps}")
        f = self.frames
        if not isinstance(f, np.ndarray) or f.dtype != np.uint8:
            raise FrameFormatError("frames must be a uint8 ndarray")
        if f.ndim != 4 or f.shape[1:] != (self.height, self.width, 3):
            raise FrameFormatError(
                f"frames shape {f.shape} does not match (n, {self.height}, {self.width}, 3)"
            )
        if f.shape[0] < 1:
            raise FrameFormatError("frame count must be >= 1")

    @property
    def frame_count(self) -> int:
        return int(self.frames.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrameSeries):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.fps == other.fps
            and np.array_equal(self.frames, other.frames)
        )


def fser_write(series: FrameSeries, path) -> None:
    path = Path(path)
    header = _HEADER.pack(
        MAGIC, VERSION, series.frame_count, series.width, series.height, series.fps
    )
    payload = np.ascontiguousarray(series.frames).tobytes()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_header(fh, path):
    raw = fh.read(HEADER_SIZE)
    if len(raw) < HEADER_SIZE:
        raise FrameFormatError(f"{path}: truncated header, got {len(raw)} of {HEADER_SIZE} bytes")
    magic, version, count, width, height, fps = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise FrameFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FrameFormatError(f"{path}: unsupported version {version}")
    if count < 1 or width < 1 or height < 1 or not fps > 0:
        raise FrameFormatError(f"{path}: invalid header fields {count}x{width}x{height}@{fps}")
    return count, width, height, fps


def fser_probe(path):
    """Header-only read: returns (frame_count, width, height, fps)."""
    with open(path, "rb") as fh:
        return _read_header(fh, path)


def fser_read(path) -> FrameSeries:
    path = Path(path)
    with open(path, "rb") as fh:
        count, width, height, fps = _read_header(fh, path)
        frame_size = width * height * 3
        expected = count * frame_size
        payload = fh.read(expected + 1)
    if len(payload) < expected:
        raise FrameFormatError(
            f"{path}: truncated payload, expected {expected} bytes, got {len(payload)} "
            f"(file ends at byte {HEADER_SIZE + len(payload)})"
        )
    if len(payload) > expected:
        raise FrameFormatError(f"{path}: trailing bytes after frame {count}")
    frames = np.frombuffer(payload, dtype=np.uint8).reshape(count, height, width, 3)
    return FrameSeries(width=width, height=height, fps=fps, frames=frames.copy())


def fser_read_slice(path, start: int, end: int) -> FrameSeries:
    """Read frames [start, end) without loading the whole file."""
    path = Path(path)
    with open(path, "rb") as fh:
        count, width, height, fps = _read_header(fh, path)
        if not 0 <= start < end <= count:
            raise FrameFormatError(f"{path}: slice [{start}, {end}) outside [0, {count})")
        frame_size = width * height * 3
        fh.seek(HEADER_SIZE + start * frame_size)
        expected = (end - start) * frame_size
        payload = fh.read(expected)
    if len(payload) < expected:
        raise FrameFormatError(
            f"{path}: truncated payload, expected {expected} bytes in slice, got {len(payload)}"
        )
    frames = np.frombuffer(payload, dtype=np.uint8).reshape(end - start, height, width, 3)
    return FrameSeries(width=width, height=height, fps=fps, frames=frames.copy())


def rgb_to_hsv(frame: np.ndarray) -> np.ndarray:
    """RGB frame -> HSV frame, H scaled to the full 0-255 range; gray gets H=S=0."""
    return kernels.rgb_to_hsv(frame)


def to_gray(frame: np.ndarray) -> np.ndarray:
    """Integer mean of the three channels; exact and offset-preserving."""
    f = frame.astype(np.int32)
    return ((f[:, :, 0] + f[:, :, 1] + f[:, :, 2]) // 3).astype(np.uint8)


# ---------------------------------------------------------------------------
# Synthetic series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    """One scripted stretch of frames: a solid color or a translating texture.

    Texture segments render a per-segment random texture (quantized to
    cell x cell patches) shifted by `shift` pixels per frame with
    wrap-around; segment boundaries are the ground-truth cut positions.
    """

    length: int
    color: Optional[tuple] = None
    shift: tuple = (0, 0)
    cell: int = 1

    def __post_init__(self):
        if self.length < 1:
            raise ValueError(f"segment length must be >= 1, got {self.length}")
        if self.cell < 1:
            raise ValueError(f"cell must be >= 1, got {self.cell}")
        if self.color is not None and (
            len(self.color) != 3 or any(not 0 <= c <= 255 for c in self.color)
        ):
            raise ValueError(f"color must be three bytes, got {self.color}")


def solid(color, length: int) -> Segment:
    return Segment(length=length, color=tuple(color))


def texture(length: int, shift=(0, 0), cell: int = 1) -> Segment:
    return Segment(length=length, shift=(int(shift[0]), int(shift[1])), cell=cell)


def segment_cuts(segments: Sequence[Segment]) -> list:
    """Ground-truth cut frame indices (a cut at t starts a new clip at t)."""
    cuts = []
    pos = 0
    for seg in segments[:-1]:
        pos += seg.length
        cuts.append(pos)
    return cuts


def _segment_texture(rng, height, width, cell) -> np.ndarray:
    gh = -(-height // cell)
    gw = -(-width // cell)
    grid = rng.integers(0, 256, size=(gh, gw, 3), dtype=np.uint8)
    full = np.repeat(np.repeat(grid, cell, axis=0), cell, axis=1)
    return full[:height, :width]


def synth_series(
    segments: Sequence[Segment],
    *,
    width: int = 64,
    height: int = 64,
    fps: float = 8.0,
    seed: int = 0,
) -> FrameSeries:
    """Render scripted segments into a deterministic FrameSeries."""
    if not segments:
        raise ValueError("at least one segment required")
    frames = np.empty((sum(s.length for s in segments), height, width, 3), dtype=np.uint8)
    pos = 0
    for index, seg in enumerate(segments):
        if seg.color is not None:
            frames[pos:pos + seg.length] = np.array(seg.color, dtype=np.uint8)
        else:
            rng = np.random.default_rng((seed, index))
            tex = _segment_texture(rng, height, width, seg.cell)
            dy, dx = seg.shift
            for k in range(seg.length):
                frames[pos + k] = np.roll(tex, (k * dy, k * dx), axis=(0, 1))
        pos += seg.length
    return FrameSeries(width=width, height=height, fps=fps, frames=frames)


def synth_spec_from_dict(spec: dict):
    """Parse the structured synthetic-generator spec used by the CLI.

    Expects {width, height, fps, seed, segments: [{kind, length, ...}]}.
    """
    segments = []
    for i, seg in enumerate(spec.get("segments", ())):
        kind = seg.get("kind")
        if kind == "solid":
            segments.append(solid(seg["color"], int(seg["length"])))
        elif kind == "texture":
            segments.append(
                texture(
                    int(seg["length"]),
                    shift=tuple(seg.get("shift", (0, 0))),
                    cell=int(seg.get("cell", 1)),
                )
            )
        else:
            raise ValueError(f"segment {i}: unknown kind {kind!r}")
    if not segments:
        raise ValueError("spec has no segments")
    return {
        "segments": segments,
        "width": int(spec.get("width", 64)),
        "height": int(spec.get("height", 64)),
        "fps": float(spec.get("fps", 8.0)),
        "seed": int(spec.get("seed", 0)),
    }
