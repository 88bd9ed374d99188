"""Coarse filtering, category-balanced sampling, and distribution reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import ClipRecord, Reason, Stage, TagSet, VidcurateError


class CurationError(VidcurateError):
    pass


@dataclass(frozen=True)
class FilterVerdict:
    keep: bool
    reasons: tuple = ()

    def __post_init__(self):
        if self.keep != (len(self.reasons) == 0):
            raise CurationError("keep verdict inconsistent with reasons")


def coarse_filter(tags: TagSet, cfg) -> FilterVerdict:
    """Collect every violated coarse predicate, not just the first."""
    reasons = []
    if tags.aesthetic < cfg.aesthetic_min:
        reasons.append(Reason.LOW_AESTHETIC)
    if tags.ocr > cfg.ocr_max:
        reasons.append(Reason.HIGH_OCR)
    if tags.temporal_consistency < cfg.tc_min:
        reasons.append(Reason.LOW_TC)
    if tags.motion < cfg.motion_lo:
        reasons.append(Reason.MOTION_LOW)
    if tags.motion > cfg.motion_hi:
        reasons.append(Reason.MOTION_HIGH)
    return FilterVerdict(keep=not reasons, reasons=tuple(reasons))


@dataclass(frozen=True)
class SamplePlan:
    allocation: dict
    target: int

    def total(self) -> int:
        return sum(self.allocation.values())


def waterfill_plan(counts: Mapping[str, int], target: int) -> SamplePlan:
    """Iterative waterfilling toward an even per-category allocation.

    Each round splits the remaining quota equally across categories with
    spare capacity; when the equal share rounds to zero, the leftovers go
    one each to the categories with the most remaining capacity (ties by
    label). Deterministic and invariant to input iteration order.
    """
    if target < 0:
        raise CurationError(f"target must be >= 0, got {target}")
    for label, count in counts.items():
        if count < 0:
            raise CurationError(f"negative count for {label!r}")
    labels = sorted(counts)
    alloc = {label: 0 for label in labels}
    total = min(target, sum(counts.values()))
    allocated = 0
    while allocated < total:
        active = [c for c in labels if alloc[c] < counts[c]]
        remaining = total - allocated
        share = remaining // len(active)
        if share >= 1:
            for c in active:
                give = min(share, counts[c] - alloc[c])
                alloc[c] += give
                allocated += give
        else:
            active.sort(key=lambda c: (-(counts[c] - alloc[c]), c))
            for c in active[:remaining]:
                alloc[c] += 1
                allocated += 1
    return SamplePlan(allocation=alloc, target=target)


def select_within_category(clips: Sequence[ClipRecord], quota: int) -> list:
    """Deterministic quality-first pick: aesthetic desc, temporal
    consistency desc, canonical id asc."""
    if quota > len(clips):
        raise CurationError(f"quota {quota} exceeds {len(clips)} available clips")
    ranked = sorted(
        clips,
        key=lambda r: (-r.tags.aesthetic, -r.tags.temporal_consistency, r.id.canonical()),
    )
    return [r.id for r in ranked[:quota]]


_DECILE_SIGNALS = ("aesthetic", "temporal_consistency", "motion")
_PERCENTILES = list(range(0, 101, 10))


@dataclass
class DistributionReport:
    """Deterministic aggregates over a manifest: category histogram, signal
    deciles, kept/dropped breakdown by reason."""

    total: int = 0
    stage_counts: dict = field(default_factory=dict)
    category_counts: dict = field(default_factory=dict)
    reason_counts: dict = field(default_factory=dict)
    kept: int = 0
    dropped: int = 0
    deciles: dict = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [f"records: {self.total}", "stages:"]
        for stage in Stage:
            lines.append(f"  {stage.value}: {self.stage_counts.get(stage.value, 0)}")
        lines.append(f"kept: {self.kept}")
        lines.append(f"dropped: {self.dropped}")
        lines.append("drop reasons:")
        for reason in Reason:
            if self.reason_counts.get(reason.value, 0):
                lines.append(f"  {reason.value}: {self.reason_counts[reason.value]}")
        lines.append("categories:")
        for label in sorted(self.category_counts):
            lines.append(f"  {label}: {self.category_counts[label]}")
        for signal in _DECILE_SIGNALS:
            if signal in self.deciles:
                rendered = " ".join(f"{v:.6g}" for v in self.deciles[signal])
                lines.append(f"{signal} deciles: {rendered}")
        return "\n".join(lines) + "\n"

    def tables(self) -> dict:
        """Plot-ready tab-delimited tables keyed by table name."""
        out = {}
        out["stage_counts"] = [("stage", "count")] + [
            (s.value, self.stage_counts.get(s.value, 0)) for s in Stage
        ]
        out["drop_reasons"] = [("reason", "count")] + [
            (r.value, self.reason_counts.get(r.value, 0)) for r in Reason
        ]
        out["category_counts"] = [("category", "count")] + [
            (label, self.category_counts[label]) for label in sorted(self.category_counts)
        ]
        rows = [("signal",) + tuple(f"p{p}" for p in _PERCENTILES)]
        for signal in _DECILE_SIGNALS:
            if signal in self.deciles:
                rows.append((signal,) + tuple(repr(v) for v in self.deciles[signal]))
        out["signal_deciles"] = rows
        return out


def distribution_report(records: Sequence[ClipRecord]) -> DistributionReport:
    report = DistributionReport(total=len(records))
    values = {signal: [] for signal in _DECILE_SIGNALS}
    for record in records:
        report.stage_counts[record.stage.value] = (
            report.stage_counts.get(record.stage.value, 0) + 1
        )
        if record.stage in (Stage.COARSE_DROPPED, Stage.FINE_DROPPED):
            report.dropped += 1
        else:
            report.kept += 1
        for reason in record.drop_reasons:
            report.reason_counts[reason.value] = report.reason_counts.get(reason.value, 0) + 1
        if record.tags is not None:
            label = record.tags.category
            report.category_counts[label] = report.category_counts.get(label, 0) + 1
            for signal in _DECILE_SIGNALS:
                values[signal].append(getattr(record.tags, signal))
    for signal, series in values.items():
        if series:
            report.deciles[signal] = [
                float(v) for v in np.percentile(np.array(series, dtype=np.float64), _PERCENTILES)
            ]
    return report
