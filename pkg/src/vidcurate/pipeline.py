"""Stage orchestration over the manifest: split, tag, filter, sample,
caption, fine.

Each stage consumes the manifest, advances records, and atomically
replaces it; a sidecar state file records the config fingerprint and the
stages already completed so interrupted runs resume without redoing work.
Clip processing order never affects output: records are sorted by
canonical id before every write.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import captionlint, curation, scenesplit, tagging
from .config import CurationConfig, config_fingerprint, load_pos_lexicon_for
from .core import (
    ClipId,
    ClipRecord,
    InvariantError,
    Reason,
    Stage,
    VidcurateError,
    manifest_read,
    manifest_write,
    stage_advance,
)
from .core import COMPLETION_RANK
from .frameio import fser_probe, fser_read, fser_read_slice
from .scorerproto import ScoreFile, ScoreRequest, ScorerClient, merge_score_files

log = logging.getLogger(__name__)

STAGES = ("split", "tag", "filter", "sample", "caption", "fine")

# the completion rank every record must reach for a stage to count as done
_STAGE_OUTPUT_RANK = {
    "split": 0,
    "tag": 1,
    "filter": 2,
    "sample": 2,
    "caption": 3,
    "fine": 4,
}


class DataError(VidcurateError):
    """Bad input data (manifests, score files, captions, FSER)."""


class ResumeError(VidcurateError):
    """Config fingerprint changed under a partially-advanced manifest."""


class ScorerFailureError(VidcurateError):
    """Scorer error ratio exceeded the configured threshold."""


@dataclass(frozen=True)
class RunPlan:
    """What to execute: ordered stage subset, paths, fingerprint, workers."""

    stages: tuple
    config: CurationConfig
    manifest_path: Path
    fingerprint: str
    workers: int = 1
    force_restage: bool = False

    def __post_init__(self):
        positions = []
        for stage in self.stages:
            if stage not in STAGES:
                raise DataError(f"unknown stage {stage!r}")
            positions.append(STAGES.index(stage))
        if positions != sorted(positions):
            raise DataError(f"stages out of pipeline order: {self.stages}")


def make_plan(cfg: CurationConfig, manifest_path, stages: Sequence[str] = STAGES,
              *, workers: Optional[int] = None, force_restage: bool = False) -> RunPlan:
    return RunPlan(
        stages=tuple(stages),
        config=cfg,
        manifest_path=Path(manifest_path),
        fingerprint=config_fingerprint(cfg),
        workers=workers if workers is not None else cfg.workers,
        force_restage=force_restage,
    )


# ---------------------------------------------------------------------------
# Run state sidecar
# ---------------------------------------------------------------------------


def _state_path(manifest_path: Path) -> Path:
    return manifest_path.with_name(manifest_path.name + ".state.json")


def load_state(manifest_path: Path) -> dict:
    path = _state_path(manifest_path)
    if not path.exists():
        return {"fingerprint": None, "stages_done": []}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def save_state(manifest_path: Path, state: dict) -> None:
    path = _state_path(manifest_path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        json.dump(state, fh, sort_keys=True)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Worker functions (top level so they pickle for the process pool)
# ---------------------------------------------------------------------------


def _split_one(args):
    path_str, cascade = args
    series = fser_read(path_str)
    boundaries = scenesplit.cascade_split(series, cascade)
    stem = Path(path_str).stem
    return [(stem, b.start, b.end) for b in boundaries]


def _motion_one(args):
    fser_path, start, end, block, radius, stride = args
    series = fser_read_slice(fser_path, start, end)
    return tagging.motion_proxy(series, block, radius, stride)


def _pool_map(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (workers * 4))))


# ---------------------------------------------------------------------------
# Scorer plumbing
# ---------------------------------------------------------------------------


class SignalSource:
    """Unified access to score files and (optionally) a live scorer."""

    def __init__(self, cfg: CurationConfig):
        self.cfg = cfg
        files = [ScoreFile.load(p) for p in cfg.score_files]
        self.scores = merge_score_files(files) if files else ScoreFile([], {})
        self.client: Optional[ScorerClient] = None
        self._requested = 0
        self._failed = 0

    def __enter__(self):
        if self.cfg.scorer.cmd:
            self.client = ScorerClient(
                list(self.cfg.scorer.cmd),
                timeout=self.cfg.scorer.timeout_s,
                window=self.cfg.scorer.window,
            )
            self.client.start()
        return self

    def __exit__(self, *exc):
        if self.client is not None:
            self.client.close()
            self.client = None

    def from_file(self, clip_id: str, column: str):
        return self.scores.get(clip_id, column)

    def batch(self, requests):
        """Send requests through the scorer; returns responses or Nones."""
        if not requests:
            return []
        if self.client is None:
            return [None] * len(requests)
        responses = self.client.request_many(requests)
        self._requested += len(responses)
        self._failed += sum(1 for r in responses if not r.ok)
        return responses

    def check_failure_budget(self):
        if self._requested == 0:
            return
        ratio = self._failed / self._requested
        if ratio > self.cfg.scorer.failure_max_ratio:
            raise ScorerFailureError(
                f"scorer failure ratio {ratio:.3f} exceeds "
                f"{self.cfg.scorer.failure_max_ratio:.3f} "
                f"({self._failed}/{self._requested} requests failed)"
            )


def _frame_indices(cid: ClipId):
    first = cid.start_frame
    last = cid.end_frame - 1
    mid = cid.start_frame + (cid.end_frame - cid.start_frame) // 2
    mid = min(mid, last)
    return first, mid, last


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def _list_fser_files(cfg: CurationConfig):
    if not cfg.fser_dir:
        raise DataError("config inputs.fser_dir is required for this stage")
    root = Path(cfg.fser_dir)
    if not root.is_dir():
        raise DataError(f"fser_dir {root} is not a directory")
    files = sorted(root.glob("*.fser"))
    if not files:
        raise DataError(f"no .fser files under {root}")
    return files


def stage_split(cfg: CurationConfig, records, workers: int):
    if records:
        # splitting only seeds an empty manifest; force_restage clears it first
        log.info("manifest already has %d records, not re-splitting", len(records))
        return records
    files = _list_fser_files(cfg)
    cascade = [(lvl.threshold, lvl.min_scene_len) for lvl in cfg.cascade]
    results = _pool_map(_split_one, [(str(p), cascade) for p in files], workers)
    out = []
    for items in results:
        for stem, start, end in items:
            out.append(ClipRecord(id=ClipId(stem, start, end), stage=Stage.SPLIT))
    return out


def stage_tag(cfg: CurationConfig, records, workers: int, source: SignalSource):
    todo = [r for r in records if r.stage is Stage.SPLIT]
    done = [r for r in records if r.stage is not Stage.SPLIT]
    if not todo:
        return records

    categories = _category_defs(cfg, source)
    fser_root = Path(cfg.fser_dir) if cfg.fser_dir else None

    # motion: ingested score file value wins, otherwise the block proxy
    motion_values = {}
    motion_jobs = []
    for r in todo:
        ingested = source.from_file(r.id.canonical(), "motion")
        if ingested is not None:
            motion_values[r.id.canonical()] = ("ingested", float(ingested))
        else:
            if fser_root is None:
                raise DataError("config inputs.fser_dir required to compute motion proxy")
            motion_jobs.append(
                (
                    str(fser_root / f"{r.id.source_video}.fser"),
                    r.id.start_frame,
                    r.id.end_frame,
                    cfg.motion_block,
                    cfg.motion_radius,
                    cfg.motion_stride,
                )
            )
    proxied = _pool_map(_motion_one, motion_jobs, workers)
    proxy_iter = iter(proxied)
    for r in todo:
        key = r.id.canonical()
        if key not in motion_values:
            motion_values[key] = ("proxy", next(proxy_iter))

    # scalar and embedding signals: score files first, then the scorer
    needed = []
    for r in todo:
        key = r.id.canonical()
        first, mid, last = _frame_indices(r.id)
        fser_path = str(fser_root / f"{r.id.source_video}.fser") if fser_root else ""
        for column, task, req_id, payload in (
            ("aesthetic", "aesthetic", key,
             {"fser": fser_path, "start": r.id.start_frame, "end": r.id.end_frame}),
            ("ocr", "ocr", key,
             {"fser": fser_path, "start": r.id.start_frame, "end": r.id.end_frame}),
            ("emb_first", "embed_frame", f"{key}#first", {"fser": fser_path, "frame": first}),
            ("emb_mid", "embed_frame", f"{key}#mid", {"fser": fser_path, "frame": mid}),
            ("emb_last", "embed_frame", f"{key}#last", {"fser": fser_path, "frame": last}),
        ):
            if source.from_file(key, column) is None:
                needed.append((key, column, ScoreRequest(task, req_id, payload)))
    if needed and source.client is None:
        key, column, _ = needed[0]
        raise DataError(
            f"missing signal: {column} for {key} "
            f"(no scorer configured and score files do not cover it)"
        )
    responses = source.batch([req for _, _, req in needed])
    fetched: dict = {}
    errors: dict = {}
    for (key, column, _), resp in zip(needed, responses):
        if resp is None or not resp.ok:
            errors.setdefault(key, []).append(f"{column}: {resp.error}")
        else:
            fetched[(key, column)] = resp.result

    def signal(key, column):
        value = source.from_file(key, column)
        if value is None:
            value = fetched.get((key, column))
        return value

    out = []
    for r in todo:
        key = r.id.canonical()
        if key in errors:
            log.warning("scorer errors for %s: %s", key, "; ".join(errors[key]))
            out.append(stage_advance(r, Stage.COARSE_DROPPED, reasons=(Reason.SCORER_ERROR,)))
            continue
        source_kind, motion = motion_values[key]
        try:
            tags = tagging.assemble_tagset(
                key,
                aesthetic=float(signal(key, "aesthetic")),
                ocr=float(signal(key, "ocr")),
                emb_first=tagging.Embedding(signal(key, "emb_first")),
                emb_mid=tagging.Embedding(signal(key, "emb_mid")),
                emb_last=tagging.Embedding(signal(key, "emb_last")),
                motion=motion,
                motion_source=source_kind,
                categories=categories,
            )
        except (tagging.TaggingError, TypeError, ValueError) as exc:
            raise DataError(f"tagging {key}: {exc}") from exc
        out.append(stage_advance(r, Stage.TAGGED, tags=tags))
    return done + out


def _category_defs(cfg: CurationConfig, source: SignalSource):
    defs = []
    requests = []
    missing = []
    for cat in cfg.categories:
        key = f"category:{cat.label}"
        vec = source.from_file(key, "emb_text")
        if vec is not None:
            defs.append(tagging.CategoryDef(cat.label, cat.prompt, tagging.Embedding(vec)))
        else:
            missing.append(cat)
            requests.append(ScoreRequest("embed_text", key, {"text": cat.prompt}))
    if missing:
        responses = source.batch(requests)
        for cat, resp in zip(missing, responses):
            if resp is None or not resp.ok:
                detail = resp.error if resp is not None else "no scorer configured"
                raise DataError(f"no embedding for category {cat.label!r}: {detail}")
            defs.append(tagging.CategoryDef(cat.label, cat.prompt,
                                            tagging.Embedding(resp.result)))
    return defs


def stage_filter(cfg: CurationConfig, records, workers: int):
    out = []
    for r in records:
        if r.stage is Stage.TAGGED:
            verdict = curation.coarse_filter(r.tags, cfg)
            if verdict.keep:
                out.append(stage_advance(r, Stage.COARSE_KEPT))
            else:
                out.append(stage_advance(r, Stage.COARSE_DROPPED, reasons=verdict.reasons))
        else:
            out.append(r)
    return out


def stage_sample(cfg: CurationConfig, records, workers: int):
    eligible = [r for r in records if r.stage is Stage.COARSE_KEPT]
    by_category: dict = {}
    for r in eligible:
        by_category.setdefault(r.tags.category, []).append(r)
    counts = {label: len(rs) for label, rs in by_category.items()}
    plan = curation.waterfill_plan(counts, cfg.sample_target)
    chosen = set()
    for label, clips in by_category.items():
        for cid in curation.select_within_category(clips, plan.allocation[label]):
            chosen.add(cid.canonical())
    out = []
    for r in records:
        if r.stage is Stage.COARSE_KEPT and r.id.canonical() not in chosen:
            out.append(stage_advance(r, Stage.COARSE_DROPPED,
                                     reasons=(Reason.SAMPLING_EXCLUDED,)))
        else:
            out.append(r)
    return out


def stage_caption(cfg: CurationConfig, records, workers: int, source: SignalSource):
    todo = [r for r in records if r.stage is Stage.COARSE_KEPT and r.caption is None]
    if not todo:
        return records
    if source.client is not None and source.client.supports("caption"):
        fser_root = Path(cfg.fser_dir) if cfg.fser_dir else None
        requests = []
        for r in todo:
            fser_path = str(fser_root / f"{r.id.source_video}.fser") if fser_root else ""
            requests.append(ScoreRequest("caption", r.id.canonical(), {
                "fser": fser_path, "start": r.id.start_frame, "end": r.id.end_frame,
            }))
        responses = source.batch(requests)
        updated = {}
        for r, resp in zip(todo, responses):
            if resp.ok:
                updated[r.id.canonical()] = stage_advance(r, Stage.CAPTIONED,
                                                          caption=resp.result)
            else:
                log.warning("caption failed for %s: %s", r.id, resp.error)
                updated[r.id.canonical()] = stage_advance(
                    r, Stage.FINE_DROPPED, reasons=(Reason.SCORER_ERROR,)
                )
        return [updated.get(r.id.canonical(), r) for r in records]
    if cfg.captions_file:
        return caption_ingest(records, cfg.captions_file)
    raise DataError("caption stage needs a scorer with the caption task or a captions_file")


def caption_ingest(records, captions_path) -> list:
    """Attach externally produced captions (TSV: clip_id<TAB>caption).

    Every row must key a COARSE_KEPT clip; kept clips without captions
    stay at COARSE_KEPT with a warning.
    """
    by_id = {r.id.canonical(): r for r in records}
    captions: dict = {}
    path = Path(captions_path)
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            clip_id, sep, text = line.partition("\t")
            if not sep:
                raise DataError(f"{path}: line {lineno}: expected clip_id<TAB>caption")
            if clip_id in captions:
                raise DataError(f"{path}: line {lineno}: duplicate caption for {clip_id}")
            record = by_id.get(clip_id)
            if record is None:
                raise DataError(f"{path}: line {lineno}: caption for unknown clip {clip_id}")
            if record.stage is not Stage.COARSE_KEPT:
                raise DataError(
                    f"{path}: line {lineno}: caption for {clip_id} at stage "
                    f"{record.stage.value}, expected COARSE_KEPT"
                )
            captions[clip_id] = text
    out = []
    uncaptioned = []
    for r in records:
        key = r.id.canonical()
        if key in captions:
            out.append(stage_advance(r, Stage.CAPTIONED, caption=captions[key]))
        else:
            if r.stage is Stage.COARSE_KEPT:
                uncaptioned.append(key)
            out.append(r)
    for key in uncaptioned:
        log.warning("kept clip %s received no caption", key)
    return out


def stage_fine(cfg: CurationConfig, records, workers: int, source: SignalSource):
    todo = [r for r in records if r.stage is Stage.CAPTIONED]
    if not todo:
        return records

    fser_root = Path(cfg.fser_dir) if cfg.fser_dir else None
    needed = []
    for r in todo:
        key = r.id.canonical()
        first, mid, last = _frame_indices(r.id)
        fser_path = str(fser_root / f"{r.id.source_video}.fser") if fser_root else ""
        for column, task, req_id, payload in (
            ("emb_text", "embed_text", key, {"text": r.caption}),
            ("emb_first", "embed_frame", f"{key}#first", {"fser": fser_path, "frame": first}),
            ("emb_mid", "embed_frame", f"{key}#mid", {"fser": fser_path, "frame": mid}),
            ("emb_last", "embed_frame", f"{key}#last", {"fser": fser_path, "frame": last}),
        ):
            if source.from_file(key, column) is None:
                if source.client is not None and source.client.supports(task):
                    needed.append((key, column, ScoreRequest(task, req_id, payload)))
    responses = source.batch([req for _, _, req in needed])
    fetched = {}
    for (key, column, _), resp in zip(needed, responses):
        if resp is not None and resp.ok:
            fetched[(key, column)] = resp.result

    judge_results = {}
    if cfg.fine_judge == "scorer":
        if source.client is None or not source.client.supports("judge"):
            raise DataError("fine_judge=scorer requires a scorer with the judge task")
        judge_responses = source.batch(
            [ScoreRequest("judge", r.id.canonical(), {"text": r.caption}) for r in todo]
        )
        for r, resp in zip(todo, judge_responses):
            judge_results[r.id.canonical()] = resp

    def embedding(key, column):
        value = source.from_file(key, column)
        if value is None:
            value = fetched.get((key, column))
        return None if value is None else tagging.Embedding(value)

    updated = {}
    for r in todo:
        key = r.id.canonical()
        caption_emb = embedding(key, "emb_text")
        frames = [embedding(key, c) for c in ("emb_first", "emb_mid", "emb_last")]
        mean_emb = tagging.mean_embedding(frames) if all(e is not None for e in frames) else None
        judge_report = None
        if cfg.fine_judge == "scorer":
            resp = judge_results[key]
            if not resp.ok:
                updated[key] = stage_advance(r, Stage.FINE_DROPPED,
                                             reasons=(Reason.SCORER_ERROR,))
                continue
            ts = captionlint.tokenize(r.caption)
            judge_report = captionlint.judge_report_from_flags(resp.result, len(ts.tokens))
        updated[key] = captionlint.fine_curate(
            r, cfg,
            caption_emb=caption_emb,
            mean_frame_emb=mean_emb if caption_emb is not None else None,
            judge_report=judge_report,
        )
    return [updated.get(r.id.canonical(), r) for r in records]


_STAGE_FUNCS = {
    "split": stage_split,
    "tag": stage_tag,
    "filter": stage_filter,
    "sample": stage_sample,
    "caption": stage_caption,
    "fine": stage_fine,
}
_SCORER_STAGES = {"tag", "caption", "fine"}


# ---------------------------------------------------------------------------
# Run loop
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    stages_run: list = field(default_factory=list)
    stages_skipped: list = field(default_factory=list)
    record_count: int = 0


def _stage_complete(stage: str, records) -> bool:
    if stage == "split":
        return len(records) > 0
    if not records:
        return False
    rank = _STAGE_OUTPUT_RANK[stage]
    return all(COMPLETION_RANK[r.stage] >= rank for r in records)


def run(plan: RunPlan) -> RunResult:
    """Execute the planned stages with resume semantics.

    A stage is skipped when the stored fingerprint matches, the state file
    marks it done, and every record already sits at or past the stage's
    output. A fingerprint mismatch against a partially-advanced manifest
    refuses to resume unless force_restage is set.
    """
    cfg = plan.config
    manifest_path = plan.manifest_path
    state = load_state(manifest_path)
    records = manifest_read(manifest_path) if manifest_path.exists() else []

    progressed = bool(records) or bool(state["stages_done"])
    if plan.force_restage:
        state = {"fingerprint": plan.fingerprint, "stages_done": []}
        if "split" in plan.stages:
            records = []
    elif progressed and state["fingerprint"] not in (None, plan.fingerprint):
        raise ResumeError(
            "config fingerprint changed under a partially-advanced manifest; "
            "rerun with --force-restage to recompute"
        )
    state["fingerprint"] = plan.fingerprint

    result = RunResult()
    needs_scorer = any(s in _SCORER_STAGES for s in plan.stages)
    source = SignalSource(cfg)
    ctx = source if needs_scorer else None
    try:
        if ctx is not None:
            ctx.__enter__()
        for stage in plan.stages:
            if (
                stage in state["stages_done"]
                and _stage_complete(stage, records)
            ):
                log.info("stage %s already complete, skipping", stage)
                result.stages_skipped.append(stage)
                continue
            before = len(records)
            func = _STAGE_FUNCS[stage]
            if stage in _SCORER_STAGES:
                records = func(cfg, records, plan.workers, source)
            else:
                records = func(cfg, records, plan.workers)
            if stage != "split" and len(records) != before:
                raise InvariantError(
                    f"stage {stage} changed record count {before} -> {len(records)}"
                )
            records = sorted(records, key=lambda r: r.id.canonical())
            manifest_write(records, manifest_path)
            if stage not in state["stages_done"]:
                state["stages_done"].append(stage)
            save_state(manifest_path, state)
            result.stages_run.append(stage)
            log.info("stage %s done: %d records", stage, len(records))
        source.check_failure_budget()
    finally:
        if ctx is not None:
            ctx.__exit__(None, None, None)
    result.record_count = len(records)
    return result


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def build_report(records, cfg: CurationConfig) -> dict:
    """Summary text plus delimited tables for a manifest."""
    dist = curation.distribution_report(records)
    captions = [r.caption for r in records if r.caption is not None]
    lexicon = load_pos_lexicon_for(cfg)
    vocab = captionlint.vocab_stats(captions, lexicon, cfg.vocab_valid_min_freq)
    tables = dist.tables()
    tables["vocab_stats"] = vocab.table()
    summary = dist.to_text() + (
        f"captions: {len(captions)}\n"
        f"avg_caption_len_words: {vocab.avg_caption_len_words:.4f}\n"
    )
    return {"summary": summary, "tables": tables, "vocab": vocab, "distribution": dist}


def write_report(records, cfg: CurationConfig, out_dir) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = build_report(records, cfg)
    (out_dir / "summary.txt").write_text(report["summary"], encoding="utf-8")
    for name, rows in report["tables"].items():
        text = "".join("\t".join(str(c) for c in row) + "\n" for row in rows)
        (out_dir / f"{name}.tsv").write_text(text, encoding="utf-8")
