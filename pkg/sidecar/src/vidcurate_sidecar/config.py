"""Sidecar configuration: which model serves each advertised task."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

ALL_TASKS = ("aesthetic", "ocr", "embed_frame", "embed_text", "caption", "judge")


class ConfigError(Exception):
    pass


@dataclass
class SidecarConfig:
    tasks: tuple = ALL_TASKS
    embed: dict = field(default_factory=lambda: {"kind": "pixel-stats", "grid": 4})
    aesthetic: dict = field(default_factory=lambda: {"kind": "luma-contrast"})
    ocr: dict = field(default_factory=lambda: {"kind": "edge-density"})
    caption: dict = field(default_factory=lambda: {"kind": "stat-captioner"})
    judge: dict = field(default_factory=lambda: {"kind": "pattern-judge"})
    device: str = "cpu"
    batch_size: int = 8
    width: int = 64
    height: int = 64
    fps: float = 8.0

    def __post_init__(self):
        unknown = [t for t in self.tasks if t not in ALL_TASKS]
        if unknown:
            raise ConfigError(f"unknown tasks {unknown}")
        if not self.tasks:
            raise ConfigError("at least one task must be advertised")
        # every advertised task must have a configured model
        needs = {
            "aesthetic": self.aesthetic, "ocr": self.ocr,
            "embed_frame": self.embed, "embed_text": self.embed,
            "caption": self.caption, "judge": self.judge,
        }
        for task in self.tasks:
            if not needs[task]:
                raise ConfigError(f"advertised task {task!r} has no configured model")
        if self.width < 1 or self.height < 1 or not self.fps > 0:
            raise ConfigError(f"bad geometry {self.width}x{self.height}@{self.fps}")


def load_config(path) -> SidecarConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config root must be a mapping")
    known = {"tasks", "embed", "aesthetic", "ocr", "caption", "judge",
             "device", "batch_size", "geometry"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    kwargs = {}
    if "tasks" in data:
        kwargs["tasks"] = tuple(data["tasks"])
    for key in ("embed", "aesthetic", "ocr", "caption", "judge"):
        if key in data:
            kwargs[key] = dict(data[key])
    if "device" in data:
        kwargs["device"] = str(data["device"])
    if "batch_size" in data:
        kwargs["batch_size"] = int(data["batch_size"])
    geometry = data.get("geometry", {})
    if "width" in geometry:
        kwargs["width"] = int(geometry["width"])
    if "height" in geometry:
        kwargs["height"] = int(geometry["height"])
    if "fps" in geometry:
        kwargs["fps"] = float(geometry["fps"])
    return SidecarConfig(**kwargs)
