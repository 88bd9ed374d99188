"""Pipeline configuration: one structured file is the single source of truth.

Every threshold the engine consults lives here; CLI flags override config
keys one-to-one. The config fingerprint (config plus lexicon contents)
guards resumability: a changed byte forces --force-restage.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import yaml

from .core import VidcurateError


class ConfigError(VidcurateError):
    pass


DEFAULT_CATEGORIES = (
    ("human", "a video of people"),
    ("animal", "a video of animals"),
    ("food", "a video of food or cooking"),
    ("scenery", "a video of natural scenery"),
    ("vehicle", "a video of vehicles"),
    ("sports", "a video of sports"),
    ("urban", "a video of city streets and buildings"),
    ("indoor", "a video of indoor scenes"),
    ("water", "a video of water, sea, or rivers"),
    ("plants", "a video of plants and flowers"),
    ("technology", "a video of technology and machines"),
    ("abstract", "an abstract or artificial video"),
)


@dataclass(frozen=True)
class CascadeLevel:
    threshold: float
    min_scene_len: int


@dataclass(frozen=True)
class CategorySpec:
    label: str
    prompt: str


@dataclass(frozen=True)
class ScorerSettings:
    cmd: tuple = ()
    timeout_s: float = 120.0
    window: int = 32
    failure_max_ratio: float = 0.2


@dataclass(frozen=True)
class CurationConfig:
    """All thresholds, quotas, cascade levels, and lexicons for one run."""

    cascade: tuple = (CascadeLevel(27.0, 15), CascadeLevel(18.0, 8))
    aesthetic_min: float = 4.5
    ocr_max: float = 0.02
    tc_min: float = 0.8
    motion_lo: float = 0.001
    motion_hi: float = 0.1
    clip_score_min: float = 0.2
    sample_target: int = 1_000_000
    categories: tuple = tuple(CategorySpec(l, p) for l, p in DEFAULT_CATEGORIES)
    st_phrases: tuple = ()  # resolved from lexicon files; empty means packaged default
    flg_markers: tuple = ()
    redup_ngram: int = 4
    redup_ratio_max: float = 0.3
    redup_run_min: int = 3
    eos_len_cap: int = 300
    vocab_valid_min_freq: int = 10
    seed: int = 0
    # motion proxy geometry
    motion_block: int = 16
    motion_radius: int = 4
    motion_stride: int = 8
    # pipeline plumbing
    fser_dir: Optional[str] = None
    score_files: tuple = ()
    captions_file: Optional[str] = None
    pos_lexicon_file: Optional[str] = None
    fine_judge: str = "rules"  # "rules" or "scorer"
    workers: int = 1
    scorer: ScorerSettings = ScorerSettings()

    def __post_init__(self):
        if not self.cascade:
            raise ConfigError("cascade must have at least one level")
        thresholds = [lvl.threshold for lvl in self.cascade]
        for a, b in zip(thresholds, thresholds[1:]):
            if b >= a:
                raise ConfigError(f"cascade thresholds must strictly decrease: {thresholds}")
        for lvl in self.cascade:
            if lvl.threshold <= 0 or lvl.min_scene_len < 1:
                raise ConfigError(f"bad cascade level {lvl}")
        if self.motion_lo > self.motion_hi:
            raise ConfigError(f"motion_lo {self.motion_lo} > motion_hi {self.motion_hi}")
        if self.sample_target < 0:
            raise ConfigError("sample_target must be >= 0")
        if self.redup_ngram < 2 or self.redup_run_min < 2:
            raise ConfigError("redup_ngram and redup_run_min must be >= 2")
        if not 0 < self.redup_ratio_max < 1:
            raise ConfigError("redup_ratio_max must be in (0, 1)")
        if self.eos_len_cap < 1:
            raise ConfigError("eos_len_cap must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be unsigned")
        if self.fine_judge not in ("rules", "scorer"):
            raise ConfigError(f"fine_judge must be rules or scorer, got {self.fine_judge!r}")
        labels = [c.label for c in self.categories]
        if len(labels) != len(set(labels)):
            raise ConfigError("category labels must be unique")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def _packaged_lines(name: str) -> list:
    text = resources.files("vidcurate").joinpath("data", name).read_text(encoding="utf-8")
    return text.splitlines()


def load_default_lexicons(cfg: CurationConfig, base: Optional[Path] = None) -> CurationConfig:
    """Fill empty phrase lists from packaged data files."""
    from .captionlint import load_phrase_list

    updates = {}
    if not cfg.st_phrases:
        updates["st_phrases"] = load_phrase_list(_packaged_lines("st_phrases.txt"))
    if not cfg.flg_markers:
        updates["flg_markers"] = load_phrase_list(_packaged_lines("flg_markers.txt"))
    return replace(cfg, **updates) if updates else cfg


def load_pos_lexicon_for(cfg: CurationConfig) -> dict:
    from .captionlint import load_pos_lexicon

    if cfg.pos_lexicon_file:
        path = Path(cfg.pos_lexicon_file)
        with open(path, encoding="utf-8") as fh:
            return load_pos_lexicon(fh, source=str(path))
    return load_pos_lexicon(_packaged_lines("pos_lexicon.tsv"), source="packaged pos_lexicon.tsv")


_TOP_LEVEL_KEYS = {
    "cascade", "thresholds", "sampling", "categories", "captionlint", "motion_proxy",
    "lexicons", "scorer", "inputs", "seed", "workers", "fine_judge",
}


def config_from_dict(data: dict, base_dir: Optional[Path] = None) -> CurationConfig:
    """Build a config from the parsed YAML structure, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    unknown = set(data) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    def resolve(p):
        if p is None:
            return None
        p = Path(p)
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        return str(p)

    kwargs = {}
    if "cascade" in data:
        levels = []
        for i, lvl in enumerate(data["cascade"]):
            try:
                levels.append(CascadeLevel(float(lvl["threshold"]), int(lvl["min_scene_len"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"cascade level {i}: {exc}") from exc
        kwargs["cascade"] = tuple(levels)
    thresholds = data.get("thresholds", {})
    for key in ("aesthetic_min", "ocr_max", "tc_min", "motion_lo", "motion_hi", "clip_score_min"):
        if key in thresholds:
            kwargs[key] = float(thresholds[key])
    extra = set(thresholds) - {
        "aesthetic_min", "ocr_max", "tc_min", "motion_lo", "motion_hi", "clip_score_min"
    }
    if extra:
        raise ConfigError(f"unknown threshold keys: {sorted(extra)}")
    sampling = data.get("sampling", {})
    if "target" in sampling:
        kwargs["sample_target"] = int(sampling["target"])
    if "categories" in data:
        cats = []
        for i, c in enumerate(data["categories"]):
            try:
                cats.append(CategorySpec(str(c["label"]), str(c["prompt"])))
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"category {i}: {exc}") from exc
        kwargs["categories"] = tuple(cats)
    lint = data.get("captionlint", {})
    for key in ("redup_ngram", "redup_run_min", "eos_len_cap", "vocab_valid_min_freq"):
        if key in lint:
            kwargs[key] = int(lint[key])
    if "redup_ratio_max" in lint:
        kwargs["redup_ratio_max"] = float(lint["redup_ratio_max"])
    motion = data.get("motion_proxy", {})
    for src, dst in (("block", "motion_block"), ("radius", "motion_radius"),
                     ("stride", "motion_stride")):
        if src in motion:
            kwargs[dst] = int(motion[src])
    lex = data.get("lexicons", {})
    if lex.get("st_phrases"):
        from .captionlint import load_phrase_list
        with open(resolve(lex["st_phrases"]), encoding="utf-8") as fh:
            kwargs["st_phrases"] = load_phrase_list(fh)
    if lex.get("flg_markers"):
        from .captionlint import load_phrase_list
        with open(resolve(lex["flg_markers"]), encoding="utf-8") as fh:
            kwargs["flg_markers"] = load_phrase_list(fh)
    if lex.get("pos_lexicon"):
        kwargs["pos_lexicon_file"] = resolve(lex["pos_lexicon"])
    scorer = data.get("scorer", {})
    if scorer:
        kwargs["scorer"] = ScorerSettings(
            cmd=tuple(scorer.get("cmd") or ()),
            timeout_s=float(scorer.get("timeout_s", 120.0)),
            window=int(scorer.get("window", 32)),
            failure_max_ratio=float(scorer.get("failure_max_ratio", 0.2)),
        )
    inputs = data.get("inputs", {})
    if inputs.get("fser_dir"):
        kwargs["fser_dir"] = resolve(inputs["fser_dir"])
    if inputs.get("score_files"):
        kwargs["score_files"] = tuple(resolve(p) for p in inputs["score_files"])
    if inputs.get("captions_file"):
        kwargs["captions_file"] = resolve(inputs["captions_file"])
    if "seed" in data:
        kwargs["seed"] = int(data["seed"])
    if "workers" in data:
        kwargs["workers"] = int(data["workers"])
    if "fine_judge" in data:
        kwargs["fine_judge"] = str(data["fine_judge"])
    cfg = CurationConfig(**kwargs)
    return load_default_lexicons(cfg)


def load_config(path) -> CurationConfig:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data, base_dir=path.parent)


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    if hasattr(value, "__dataclass_fields__"):
        return {f.name: _jsonable(getattr(value, f.name)) for f in fields(value)}
    return value


def config_fingerprint(cfg: CurationConfig) -> str:
    """Content hash over the whole config plus resolved lexicon contents."""
    cfg = load_default_lexicons(cfg)
    blob = {f.name: _jsonable(getattr(cfg, f.name)) for f in fields(cfg)}
    blob.pop("workers", None)  # parallelism never changes results
    pos = load_pos_lexicon_for(cfg)
    blob["pos_lexicon"] = sorted(pos.items())
    raw = json.dumps(blob, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(raw).hexdigest()
