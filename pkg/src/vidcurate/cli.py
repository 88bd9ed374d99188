"""Command-line face of the engine.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 scorer
failure threshold exceeded. VIDCURATE_CONFIG supplies the config path
when --config is omitted.
"""

from __future__ import annotations

import argparse
import logging
import os
import shlex
import sys
from pathlib import Path

import yaml

from . import pipeline
from .config import ConfigError, CurationConfig, load_config
from .core import ManifestError, VidcurateError, manifest_read
from .frameio import FrameFormatError, fser_write, synth_series, synth_spec_from_dict

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SCORER = 3


def _add_common(parser):
    parser.add_argument("--config", help="config file (or set VIDCURATE_CONFIG)")
    parser.add_argument("--manifest", help="manifest path")
    parser.add_argument("--workers", type=int, help="worker processes")
    parser.add_argument("--seed", type=int, help="override config seed")
    parser.add_argument("--force-restage", action="store_true",
                        help="recompute even when fingerprints mismatch")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vidcurate",
                                     description="coarse-to-fine video-text curation")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("split", "detect scene cuts in FSER inputs and seed the manifest"),
        ("tag", "attach aesthetic/OCR/consistency/category/motion tags"),
        ("filter", "apply coarse thresholds with reason codes"),
        ("sample", "category-balanced sampling to the configured target"),
        ("run", "run all stages with resume semantics"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "run":
            p.add_argument("--stages", help="comma-separated stage subset")

    p = sub.add_parser("caption-ingest", help="attach captions from a TSV file")
    _add_common(p)
    p.add_argument("--captions", required=True, help="clip_id<TAB>caption file")

    p = sub.add_parser("lint-captions", help="per-clip caption defect reports")
    _add_common(p)
    p.add_argument("--out", help="output TSV (default stdout)")

    p = sub.add_parser("vocab-stats", help="corpus vocabulary table")
    _add_common(p)
    p.add_argument("--out", help="output TSV (default stdout)")

    p = sub.add_parser("report", help="per-stage counts, distributions, vocab table")
    _add_common(p)
    p.add_argument("--out-dir", help="report directory (default <manifest>.reports)")

    p = sub.add_parser("synth", help="render a synthetic FSER from a YAML spec")
    p.add_argument("spec", help="synthetic series spec file")
    p.add_argument("out", help="output .fser path")

    p = sub.add_parser("scorer-check", help="run the scorer-protocol conformance checklist")
    p.add_argument("--cmd", required=True, help="scorer command line (shell-quoted)")
    return parser


def _load_cfg(args) -> CurationConfig:
    path = getattr(args, "config", None) or os.environ.get("VIDCURATE_CONFIG")
    cfg = load_config(path) if path else CurationConfig()
    from .config import load_default_lexicons

    cfg = load_default_lexicons(cfg)
    overrides = {}
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    return cfg


def _manifest_path(args) -> Path:
    if not getattr(args, "manifest", None):
        raise ConfigError("--manifest is required for this command")
    return Path(args.manifest)


def _run_stages(args, stages) -> int:
    cfg = _load_cfg(args)
    plan = pipeline.make_plan(
        cfg,
        _manifest_path(args),
        stages,
        workers=args.workers,
        force_restage=args.force_restage,
    )
    result = pipeline.run(plan)
    log.info("ran %s, skipped %s, %d records",
             result.stages_run, result.stages_skipped, result.record_count)
    return EXIT_OK


def _cmd_caption_ingest(args) -> int:
    manifest_path = _manifest_path(args)
    records = manifest_read(manifest_path)
    from .core import manifest_write

    updated = pipeline.caption_ingest(records, args.captions)
    updated = sorted(updated, key=lambda r: r.id.canonical())
    manifest_write(updated, manifest_path)
    # record caption completion so a later `run` resumes at the fine stage
    cfg = _load_cfg(args)
    state = pipeline.load_state(manifest_path)
    state["fingerprint"] = pipeline.config_fingerprint(cfg)
    if "caption" not in state["stages_done"]:
        state["stages_done"].append("caption")
    pipeline.save_state(manifest_path, state)
    return EXIT_OK


def _cmd_lint_captions(args) -> int:
    from .captionlint import lint_caption

    cfg = _load_cfg(args)
    records = manifest_read(_manifest_path(args))
    rows = [("clip_id", "st", "flg", "redup", "eos_fail", "evidence")]
    for r in records:
        if r.caption is None:
            continue
        report = lint_caption(r.caption, cfg)
        spans = ";".join(f"{name}:{s}-{e}" for name, s, e in report.evidence)
        rows.append((r.id.canonical(), int(report.st), int(report.flg),
                     int(report.redup), int(report.eos_fail), spans))
    text = "".join("\t".join(str(c) for c in row) + "\n" for row in rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_vocab_stats(args) -> int:
    from .captionlint import vocab_stats
    from .config import load_pos_lexicon_for

    cfg = _load_cfg(args)
    records = manifest_read(_manifest_path(args))
    captions = [r.caption for r in records if r.caption is not None]
    stats = vocab_stats(captions, load_pos_lexicon_for(cfg), cfg.vocab_valid_min_freq)
    text = "".join("\t".join(str(c) for c in row) + "\n" for row in stats.table())
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_report(args) -> int:
    cfg = _load_cfg(args)
    manifest_path = _manifest_path(args)
    records = manifest_read(manifest_path)
    out_dir = args.out_dir or (str(manifest_path) + ".reports")
    pipeline.write_report(records, cfg, out_dir)
    summary = Path(out_dir) / "summary.txt"
    sys.stdout.write(summary.read_text(encoding="utf-8"))
    return EXIT_OK


def _cmd_synth(args) -> int:
    with open(args.spec, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    spec = synth_spec_from_dict(raw)
    series = synth_series(
        spec["segments"], width=spec["width"], height=spec["height"],
        fps=spec["fps"], seed=spec["seed"],
    )
    fser_write(series, args.out)
    print(f"wrote {series.frame_count} frames to {args.out}")
    return EXIT_OK


def _cmd_scorer_check(args) -> int:
    from .conformance import run_conformance

    results = run_conformance(shlex.split(args.cmd))
    failed = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] {name}"
        if detail and not ok:
            line += f": {detail}"
        print(line)
        failed += 0 if ok else 1
    return EXIT_OK if failed == 0 else EXIT_SCORER


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command in ("split", "tag", "filter", "sample"):
            return _run_stages(args, (args.command,))
        if args.command == "run":
            stages = pipeline.STAGES
            if getattr(args, "stages", None):
                stages = tuple(s.strip() for s in args.stages.split(",") if s.strip())
            return _run_stages(args, stages)
        if args.command == "caption-ingest":
            return _cmd_caption_ingest(args)
        if args.command == "lint-captions":
            return _cmd_lint_captions(args)
        if args.command == "vocab-stats":
            return _cmd_vocab_stats(args)
        if args.command == "report":
            return _cmd_report(args)
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "scorer-check":
            return _cmd_scorer_check(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except pipeline.ScorerFailureError as exc:
        log.error("%s", exc)
        return EXIT_SCORER
    except (ConfigError, pipeline.ResumeError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (ManifestError, FrameFormatError, pipeline.DataError, VidcurateError) as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except FileNotFoundError as exc:
        log.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
