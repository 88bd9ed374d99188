"""Domain types shared by every stage, plus the line-per-record manifest.

The manifest is UTF-8 JSON lines with a stable field order (see
docs/manifest.md); records are immutable values and the stage machine
below is the only way they advance.
"""

from __future__ import annotations

import enum
import json
import math
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence


class VidcurateError(Exception):
    """Base for all errors raised by this package."""


class InvariantError(VidcurateError):
    """A domain value violates one of its declared invariants."""


class StageError(VidcurateError):
    """Illegal stage transition."""


class ManifestError(VidcurateError):
    """Malformed or inconsistent manifest file."""


class Stage(enum.Enum):
    SPLIT = "SPLIT"
    TAGGED = "TAGGED"
    COARSE_KEPT = "COARSE_KEPT"
    COARSE_DROPPED = "COARSE_DROPPED"
    CAPTIONED = "CAPTIONED"
    FINE_KEPT = "FINE_KEPT"
    FINE_DROPPED = "FINE_DROPPED"


# declaration order doubles as the ordering used by the caption invariant
_STAGE_ORDER = {s: i for i, s in enumerate(Stage)}

# how far through the pipeline a record is; terminal states count as done
COMPLETION_RANK = {
    Stage.SPLIT: 0,
    Stage.TAGGED: 1,
    Stage.COARSE_KEPT: 2,
    Stage.COARSE_DROPPED: 5,
    Stage.CAPTIONED: 3,
    Stage.FINE_KEPT: 5,
    Stage.FINE_DROPPED: 5,
}

DROPPED_STAGES = frozenset({Stage.COARSE_DROPPED, Stage.FINE_DROPPED})
TERMINAL_STAGES = frozenset({Stage.COARSE_DROPPED, Stage.FINE_KEPT, Stage.FINE_DROPPED})


class Reason(str, enum.Enum):
    """Closed enum of machine-readable drop reasons."""

    LOW_AESTHETIC = "low_aesthetic"
    HIGH_OCR = "high_ocr"
    LOW_TC = "low_tc"
    MOTION_LOW = "motion_low"
    MOTION_HIGH = "motion_high"
    LOW_CLIP_SCORE = "low_clip_score"
    SAMPLING_EXCLUDED = "sampling_excluded"
    CAPTION_ST = "caption_st"
    CAPTION_FLG = "caption_flg"
    CAPTION_REDUP = "caption_redup"
    CAPTION_EOS = "caption_eos"
    # failed scorer requests quarantine the clip instead of silently dropping it
    SCORER_ERROR = "scorer_error"


_ID_SPAN_RE = re.compile(r"^(\d+)-(\d+)$")


@dataclass(frozen=True)
class ClipId:
    """Identity of one clip: source video plus [start_frame, end_frame).

    Ordering throughout the pipeline is by the canonical string form, not
    by numeric fields; sort with key=lambda cid: cid.canonical().
    """

    source_video: str
    start_frame: int
    end_frame: int

    def __post_init__(self):
        if not self.source_video:
            raise InvariantError("source_video must be nonempty")
        if any(c in self.source_video for c in "\n\r\t"):
            raise InvariantError(f"source_video contains control characters: {self.source_video!r}")
        if self.start_frame < 0:
            raise InvariantError(f"start_frame must be >= 0, got {self.start_frame}")
        if self.end_frame <= self.start_frame:
            raise InvariantError(
                f"end_frame must exceed start_frame, got {self.start_frame}-{self.end_frame}"
            )

    def canonical(self) -> str:
        return f"{self.source_video}:{self.start_frame}-{self.end_frame}"

    def __str__(self) -> str:
        return self.canonical()

    @classmethod
    def parse(cls, text: str) -> "ClipId":
        source, sep, span = text.rpartition(":")
        if not sep:
            raise InvariantError(f"clip id missing ':' separator: {text!r}")
        m = _ID_SPAN_RE.match(span)
        if m is None:
            raise InvariantError(f"clip id span must be '<start>-<end>': {text!r}")
        return cls(source, int(m.group(1)), int(m.group(2)))


def _check_unit(name: str, value: float) -> None:
    if not (-1.0 <= value <= 1.0):
        raise InvariantError(f"{name} must be in [-1, 1], got {value}")


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise InvariantError(f"{name} must be finite, got {value}")


@dataclass(frozen=True)
class TagSet:
    """Coarse-curation signals for one clip; clip_score arrives after captioning."""

    aesthetic: float
    ocr: float
    temporal_consistency: float
    category: str
    category_sim: float
    motion: float
    motion_source: str = "proxy"
    clip_score: Optional[float] = None

    def __post_init__(self):
        for name in ("aesthetic", "ocr", "temporal_consistency", "category_sim", "motion"):
            _check_finite(name, getattr(self, name))
        if self.ocr < 0:
            raise InvariantError(f"ocr must be >= 0, got {self.ocr}")
        _check_unit("temporal_consistency", self.temporal_consistency)
        _check_unit("category_sim", self.category_sim)
        if self.motion < 0:
            raise InvariantError(f"motion must be >= 0, got {self.motion}")
        if not self.category:
            raise InvariantError("category label must be nonempty")
        if self.motion_source not in ("proxy", "ingested"):
            raise InvariantError(f"unknown motion_source: {self.motion_source!r}")
        if self.clip_score is not None:
            _check_finite("clip_score", self.clip_score)
            _check_unit("clip_score", self.clip_score)


_DEFECT_NAMES = ("st", "flg", "redup", "eos_fail")


@dataclass(frozen=True)
class DefectReport:
    """Boolean caption-defect findings plus token-span evidence."""

    st: bool
    flg: bool
    redup: bool
    eos_fail: bool
    evidence: tuple = ()

    def __post_init__(self):
        seen = set()
        for item in self.evidence:
            defect, start, end = item
            if defect not in _DEFECT_NAMES:
                raise InvariantError(f"unknown defect in evidence: {defect!r}")
            if not (0 <= start < end):
                raise InvariantError(f"bad evidence span ({start}, {end}) for {defect}")
            seen.add(defect)
        for name in _DEFECT_NAMES:
            if getattr(self, name) and name not in seen:
                raise InvariantError(f"defect {name} flagged without evidence")

    def any_flag(self) -> bool:
        return self.st or self.flg or self.redup or self.eos_fail


@dataclass(frozen=True)
class ClipRecord:
    """One clip's journey through the pipeline; the manifest row."""

    id: ClipId
    stage: Stage
    tags: Optional[TagSet] = None
    caption: Optional[str] = None
    drop_reasons: tuple = ()
    defects: Optional[DefectReport] = None

    def __post_init__(self):
        dropped = self.stage in DROPPED_STAGES
        if dropped and not self.drop_reasons:
            raise InvariantError(f"{self.id}: {self.stage.value} requires drop reasons")
        if not dropped and self.drop_reasons:
            raise InvariantError(f"{self.id}: drop reasons on non-dropped stage {self.stage.value}")
        for r in self.drop_reasons:
            if not isinstance(r, Reason):
                raise InvariantError(f"{self.id}: drop reason is not a Reason: {r!r}")
        if self.caption is not None and _STAGE_ORDER[self.stage] < _STAGE_ORDER[Stage.CAPTIONED]:
            raise InvariantError(f"{self.id}: caption present before CAPTIONED ({self.stage.value})")
        if self.stage in (Stage.CAPTIONED, Stage.FINE_KEPT) and self.caption is None:
            raise InvariantError(f"{self.id}: {self.stage.value} requires a caption")
        if self.stage in (Stage.TAGGED, Stage.COARSE_KEPT, Stage.CAPTIONED, Stage.FINE_KEPT):
            if self.tags is None:
                raise InvariantError(f"{self.id}: {self.stage.value} requires tags")
        if self.stage == Stage.SPLIT and self.tags is not None:
            raise InvariantError(f"{self.id}: SPLIT record must not carry tags")
        if self.defects is not None and self.stage not in (Stage.FINE_KEPT, Stage.FINE_DROPPED):
            raise InvariantError(f"{self.id}: defects attached before fine stage")


# Legal transitions. Beyond the happy path, clips may drop early when a
# scorer fails (SPLIT/COARSE_KEPT sources) or when sampling excludes them.
_TRANSITIONS = {
    (Stage.SPLIT, Stage.TAGGED),
    (Stage.SPLIT, Stage.COARSE_DROPPED),
    (Stage.TAGGED, Stage.COARSE_KEPT),
    (Stage.TAGGED, Stage.COARSE_DROPPED),
    (Stage.COARSE_KEPT, Stage.COARSE_DROPPED),
    (Stage.COARSE_KEPT, Stage.CAPTIONED),
    (Stage.COARSE_KEPT, Stage.FINE_DROPPED),
    (Stage.CAPTIONED, Stage.FINE_KEPT),
    (Stage.CAPTIONED, Stage.FINE_DROPPED),
}


def stage_advance(
    record: ClipRecord,
    next_stage: Stage,
    *,
    tags: Optional[TagSet] = None,
    caption: Optional[str] = None,
    defects: Optional[DefectReport] = None,
    reasons: Sequence[Reason] = (),
) -> ClipRecord:
    """Advance a record along the stage machine, attaching the stage payload.

    Dropped stages are terminal and require at least one reason; payload
    fields not supplied are carried over from the current record.
    """
    if record.stage in TERMINAL_STAGES:
        raise StageError(f"{record.id}: {record.stage.value} is terminal")
    if (record.stage, next_stage) not in _TRANSITIONS:
        raise StageError(f"{record.id}: illegal transition {record.stage.value} -> {next_stage.value}")
    if next_stage in DROPPED_STAGES and not reasons:
        raise StageError(f"{record.id}: transition to {next_stage.value} without reasons")
    if next_stage not in DROPPED_STAGES and reasons:
        raise StageError(f"{record.id}: reasons supplied for non-dropped {next_stage.value}")
    return ClipRecord(
        id=record.id,
        stage=next_stage,
        tags=tags if tags is not None else record.tags,
        caption=caption if caption is not None else record.caption,
        drop_reasons=tuple(reasons),
        defects=defects if defects is not None else record.defects,
    )


# ---------------------------------------------------------------------------
# Manifest serialization
# ---------------------------------------------------------------------------


def _tags_to_obj(tags: TagSet) -> dict:
    obj = {
        "aesthetic": tags.aesthetic,
        "ocr": tags.ocr,
        "temporal_consistency": tags.temporal_consistency,
        "category": tags.category,
        "category_sim": tags.category_sim,
        "motion": tags.motion,
        "motion_source": tags.motion_source,
    }
    if tags.clip_score is not None:
        obj["clip_score"] = tags.clip_score
    return obj


def _tags_from_obj(obj: dict) -> TagSet:
    return TagSet(
        aesthetic=float(obj["aesthetic"]),
        ocr=float(obj["ocr"]),
        temporal_consistency=float(obj["temporal_consistency"]),
        category=str(obj["category"]),
        category_sim=float(obj["category_sim"]),
        motion=float(obj["motion"]),
        motion_source=str(obj.get("motion_source", "proxy")),
        clip_score=float(obj["clip_score"]) if "clip_score" in obj else None,
    )


def record_to_json(record: ClipRecord) -> str:
    obj = {"id": record.id.canonical(), "stage": record.stage.value}
    if record.tags is not None:
        obj["tags"] = _tags_to_obj(record.tags)
    if record.caption is not None:
        obj["caption"] = record.caption
    obj["drop_reasons"] = [r.value for r in record.drop_reasons]
    if record.defects is not None:
        d = record.defects
        obj["defects"] = {
            "st": d.st,
            "flg": d.flg,
            "redup": d.redup,
            "eos_fail": d.eos_fail,
            "evidence": [[name, start, end] for name, start, end in d.evidence],
        }
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def record_from_json(line: str) -> ClipRecord:
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("record line is not an object")
    defects = None
    if "defects" in obj:
        d = obj["defects"]
        defects = DefectReport(
            st=bool(d["st"]),
            flg=bool(d["flg"]),
            redup=bool(d["redup"]),
            eos_fail=bool(d["eos_fail"]),
            evidence=tuple((e[0], int(e[1]), int(e[2])) for e in d.get("evidence", ())),
        )
    return ClipRecord(
        id=ClipId.parse(obj["id"]),
        stage=Stage(obj["stage"]),
        tags=_tags_from_obj(obj["tags"]) if "tags" in obj else None,
        caption=obj.get("caption"),
        drop_reasons=tuple(Reason(r) for r in obj.get("drop_reasons", ())),
        defects=defects,
    )


def manifest_write(records: Sequence[ClipRecord], path) -> None:
    """Write records as JSON lines, atomically (temp file + rename).

    Records must arrive sorted by canonical clip id with no duplicates;
    violations are rejected before any byte is written.
    """
    path = Path(path)
    lines = []
    prev_key = None
    for i, record in enumerate(records):
        key = record.id.canonical()
        if prev_key is not None and key <= prev_key:
            what = "duplicate" if key == prev_key else "unsorted"
            raise ManifestError(f"records {what} at position {i}: {prev_key!r} then {key!r}")
        prev_key = key
        lines.append(record_to_json(record))
    data = "".join(line + "\n" for line in lines)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def manifest_read(path) -> list:
    """Read a manifest back into records, validating every line.

    Raises ManifestError naming the line number for malformed lines and
    citing both lines for duplicated clip ids.
    """
    path = Path(path)
    records = []
    seen: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                raise ManifestError(f"{path}: line {lineno}: empty line")
            try:
                record = record_from_json(line)
            except (json.JSONDecodeError, KeyError, ValueError, TypeError, InvariantError) as exc:
                raise ManifestError(f"{path}: line {lineno}: {exc}") from exc
            key = record.id.canonical()
            if key in seen:
                raise ManifestError(
                    f"{path}: duplicate clip id {key} on lines {seen[key]} and {lineno}"
                )
            seen[key] = lineno
            records.append(record)
    return records
