"""Independent implementation of the FSER container.

Layout (little-endian): magic "FSER", u32 version (1), u32 frame_count,
u16 width, u16 height, f32 fps, then frame_count raw RGB frames of
width*height*3 bytes. Kept deliberately separate from the engine's
reader so the two implementations cross-check each other.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

MAGIC = b"FSER"
VERSION = 1
_HEADER = struct.Struct("<4sIIHHf")
HEADER_SIZE = _HEADER.size


class FserError(Exception):
    pass


def write_fser(frames: np.ndarray, fps: float, path) -> None:
    """Write (n, h, w, 3) uint8 frames atomically; no partial output."""
    path = Path(path)
    if frames.ndim != 4 or frames.shape[3] != 3 or frames.dtype != np.uint8:
        raise FserError(f"frames must be (n, h, w, 3) uint8, got {frames.shape} {frames.dtype}")
    n, h, w, _ = frames.shape
    if n < 1 or h < 1 or w < 1 or not fps > 0:
        raise FserError(f"invalid geometry {n}x{w}x{h}@{fps}")
    header = _HEADER.pack(MAGIC, VERSION, n, w, h, fps)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(frames).tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_header(path):
    with open(path, "rb") as fh:
        raw = fh.read(HEADER_SIZE)
    if len(raw) < HEADER_SIZE:
        raise FserError(f"{path}: truncated header")
    magic, version, count, width, height, fps = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise FserError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FserError(f"{path}: unsupported version {version}")
    return count, width, height, fps


def read_frames(path, start: int = 0, end: int | None = None) -> np.ndarray:
    """Read frames [start, end) as an (n, h, w, 3) uint8 array."""
    count, width, height, fps = read_header(path)
    if end is None:
        end = count
    if not 0 <= start < end <= count:
        raise FserError(f"{path}: slice [{start}, {end}) outside [0, {count})")
    frame_size = width * height * 3
    with open(path, "rb") as fh:
        fh.seek(HEADER_SIZE + start * frame_size)
        payload = fh.read((end - start) * frame_size)
    if len(payload) < (end - start) * frame_size:
        raise FserError(f"{path}: truncated payload")
    return np.frombuffer(payload, dtype=np.uint8).reshape(end - start, height, width, 3).copy()


def read_frame(path, index: int) -> np.ndarray:
    return read_frames(path, index, index + 1)[0]
