"""Convert source media (video files or image sequences) to FSER.

Frames are resampled to the configured fps by nearest-index selection and
resized bilinearly to the analysis geometry. Conversion is atomic: a
decode failure leaves no partial output.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from . import fserio

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp"}


class ConvertError(Exception):
    pass


def _resample_indices(n_frames: int, src_fps: float, dst_fps: float):
    """Source indices for nearest-neighbor fps resampling."""
    indices = []
    k = 0
    while True:
        src = int(round(k * src_fps / dst_fps))
        if src >= n_frames:
            break
        indices.append(src)
        k += 1
    return indices


def _resize(frame: np.ndarray, width: int, height: int) -> np.ndarray:
    if frame.shape[0] == height and frame.shape[1] == width:
        return frame
    img = Image.fromarray(frame).resize((width, height), Image.BILINEAR)
    return np.asarray(img, dtype=np.uint8)


def _decode_image_dir(path: Path):
    files = sorted(p for p in path.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS)
    if not files:
        raise ConvertError(f"{path}: no image files found")
    frames = []
    for f in files:
        try:
            with Image.open(f) as img:
                frames.append(np.asarray(img.convert("RGB"), dtype=np.uint8))
        except OSError as exc:
            raise ConvertError(f"{f}: undecodable image: {exc}") from exc
    return frames


def _decode_video(path: Path):
    try:
        import cv2
    except ImportError as exc:
        raise ConvertError(f"video decoding requires opencv-python-headless: {exc}") from exc
    cap = cv2.VideoCapture(str(path))
    if not cap.isOpened():
        raise ConvertError(f"{path}: undecodable media")
    src_fps = cap.get(cv2.CAP_PROP_FPS) or 0.0
    frames = []
    while True:
        ok, bgr = cap.read()
        if not ok:
            break
        frames.append(bgr[:, :, ::-1].copy())
    cap.release()
    if not frames:
        raise ConvertError(f"{path}: no frames decoded")
    return frames, src_fps


def media_to_fser(input_path, output_path, *, width: int, height: int,
                  fps: float, src_fps: float | None = None) -> int:
    """Decode, resample, resize, and write FSER; returns the frame count."""
    input_path = Path(input_path)
    if input_path.is_dir():
        frames = _decode_image_dir(input_path)
        if src_fps is None or not src_fps > 0:
            raise ConvertError("image sequences need --src-fps")
        source_rate = src_fps
    else:
        if not input_path.exists():
            raise ConvertError(f"{input_path}: no such file")
        frames, source_rate = _decode_video(input_path)
        if src_fps is not None and src_fps > 0:
            source_rate = src_fps
        if not source_rate > 0:
            raise ConvertError(f"{input_path}: source fps unknown, pass --src-fps")
    indices = _resample_indices(len(frames), source_rate, fps)
    if not indices:
        raise ConvertError(f"{input_path}: resampling produced no frames")
    resized = np.stack([_resize(frames[i], width, height) for i in indices])
    fserio.write_fser(resized, fps, output_path)
    return len(indices)
