"""Fine curation: caption defect detectors, the clip-score gate, and
vocabulary statistics.

The defect taxonomy (scene transition, frame-level generation,
reduplication, EOS failure) is implemented as deterministic pattern
detectors over a normalized token stream; an LLM judge can stand in for
them through the scorer protocol, returning the same report shape.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional, Sequence

from .core import ClipRecord, DefectReport, Reason, Stage, VidcurateError
from .curation import FilterVerdict
from .tagging import Embedding, cosine


class LintError(VidcurateError):
    pass


_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_SENTENCE_END = frozenset(".!?")


@dataclass(frozen=True)
class TokenStream:
    """Lowercase word tokens plus sentence-boundary indices.

    A boundary at index b means a sentence ends just before token b;
    boundaries are strictly increasing and never delimit empty sentences.
    """

    tokens: tuple
    boundaries: tuple = ()

    def sentences(self) -> list:
        """Boundary-delimited token spans; an unterminated tail is excluded."""
        spans = []
        prev = 0
        for b in self.boundaries:
            spans.append((prev, b))
            prev = b
        return spans


def tokenize(caption: str) -> TokenStream:
    """Lowercase, split on non-alphanumeric runs, mark sentence boundaries
    after '.', '!' and '?'."""
    lowered = caption.lower()
    tokens = []
    ends = []
    for m in _TOKEN_RE.finditer(lowered):
        tokens.append(m.group())
        ends.append(m.end())
    boundaries = []
    count = 0
    token_idx = 0
    for pos, ch in enumerate(lowered):
        while token_idx < len(ends) and ends[token_idx] <= pos:
            token_idx += 1
        if ch in _SENTENCE_END:
            b = token_idx
            if b > 0 and (not boundaries or b > boundaries[-1]):
                boundaries.append(b)
    return TokenStream(tokens=tuple(tokens), boundaries=tuple(boundaries))


def _find_phrase(tokens: Sequence[str], phrase: Sequence[str]) -> list:
    n = len(phrase)
    if n == 0:
        return []
    hits = []
    for i in range(len(tokens) - n + 1):
        if tuple(tokens[i:i + n]) == tuple(phrase):
            hits.append((i, i + n))
    return hits


def detect_redup(ts: TokenStream, *, ngram: int, ratio_max: float, run_min: int):
    """Reduplication: back-to-back n-gram loops, low distinct-n-gram ratio,
    or a full sentence repeated verbatim."""
    if ngram < 2 or run_min < 2 or not 0 < ratio_max < 1:
        raise LintError(f"bad redup config ngram={ngram} ratio_max={ratio_max} run_min={run_min}")
    tokens = ts.tokens
    spans = []

    # (a) contiguous n-gram repeated back-to-back at least run_min times
    i = 0
    while i + ngram * run_min <= len(tokens):
        unit = tokens[i:i + ngram]
        reps = 1
        while tokens[i + reps * ngram:i + (reps + 1) * ngram] == unit:
            reps += 1
        if reps >= run_min:
            spans.append((i, i + reps * ngram))
            i += reps * ngram
        else:
            i += 1

    # (b) distinct-n-gram ratio collapse over the whole stream
    if len(tokens) >= 2 * ngram:
        all_grams = [tokens[j:j + ngram] for j in range(len(tokens) - ngram + 1)]
        ratio = len(set(all_grams)) / len(all_grams)
        if ratio < 1.0 - ratio_max:
            spans.append((0, len(tokens)))

    # (c) any boundary-delimited sentence appearing twice or more
    sentence_spans = ts.sentences()
    by_text = {}
    for span in sentence_spans:
        by_text.setdefault(tokens[span[0]:span[1]], []).append(span)
    for _, occurrences in sorted(by_text.items()):
        if len(occurrences) >= 2:
            spans.extend(occurrences)

    return bool(spans), tuple(dict.fromkeys(spans))


def detect_flg(ts: TokenStream, markers: Sequence[str]):
    """Frame-level generation: two or more frame-enumeration marker hits."""
    if not markers:
        raise LintError("empty FLG marker lexicon")
    hits = []
    for marker in markers:
        phrase = tokenize(marker).tokens
        hits.extend(_find_phrase(ts.tokens, phrase))
    hits.sort()
    return len(hits) >= 2, tuple(hits) if len(hits) >= 2 else ()


def detect_st(ts: TokenStream, phrases: Sequence[str]):
    """Scene-transition mention: any single phrase hit flags the caption.

    Matching is over the token stream, so phrases spanning punctuation or
    sentence boundaries still match.
    """
    if not phrases:
        raise LintError("empty ST phrase lexicon")
    hits = []
    for phrase in phrases:
        hits.extend(_find_phrase(ts.tokens, tokenize(phrase).tokens))
    hits.sort()
    return bool(hits), tuple(hits)


def detect_eos_fail(caption: str, ts: TokenStream, *, eos_len_cap: int, ngram: int):
    """EOS failure: a long caption without sentence-final punctuation, or a
    terminal back-to-back n-gram loop over the trailing 3N tokens."""
    if eos_len_cap < 1:
        raise LintError(f"eos_len_cap must be >= 1, got {eos_len_cap}")
    tokens = ts.tokens
    n = len(tokens)
    stripped = caption.rstrip()
    unterminated = n >= eos_len_cap and (not stripped or stripped[-1] not in _SENTENCE_END)
    if unterminated:
        start = ts.boundaries[-1] if ts.boundaries else 0
        if start >= n:
            start = max(0, n - 1)
        return True, ((start, n),)
    if n >= 3 * ngram:
        tail = tokens[n - 3 * ngram:]
        unit = tail[:ngram]
        if tail[ngram:2 * ngram] == unit and tail[2 * ngram:] == unit:
            return True, ((n - 3 * ngram, n),)
    return False, ()


def clip_score_gate(caption_emb: Embedding, mean_frame_emb: Embedding, minimum: float) -> FilterVerdict:
    """Keep iff cosine(caption, mean frame embedding) >= minimum."""
    value = cosine(caption_emb, mean_frame_emb)
    if value >= minimum:
        return FilterVerdict(keep=True)
    return FilterVerdict(keep=False, reasons=(Reason.LOW_CLIP_SCORE,))


def lint_caption(caption: str, cfg) -> DefectReport:
    """Run all four detectors and assemble the evidence-tagged report."""
    ts = tokenize(caption)
    st_flag, st_spans = detect_st(ts, cfg.st_phrases)
    flg_flag, flg_spans = detect_flg(ts, cfg.flg_markers)
    redup_flag, redup_spans = detect_redup(
        ts, ngram=cfg.redup_ngram, ratio_max=cfg.redup_ratio_max, run_min=cfg.redup_run_min
    )
    eos_flag, eos_spans = detect_eos_fail(
        caption, ts, eos_len_cap=cfg.eos_len_cap, ngram=cfg.redup_ngram
    )
    evidence = tuple(
        (name, s, e)
        for name, spans in (
            ("st", st_spans),
            ("flg", flg_spans),
            ("redup", redup_spans),
            ("eos_fail", eos_spans),
        )
        for s, e in spans
    )
    return DefectReport(st=st_flag, flg=flg_flag, redup=redup_flag, eos_fail=eos_flag,
                        evidence=evidence)


def judge_report_from_flags(flags: Mapping[str, bool], n_tokens: int) -> DefectReport:
    """Build a DefectReport from an external judge's booleans.

    Judges report no spans, so true flags get the whole caption as evidence.
    """
    span = (0, max(1, n_tokens))
    evidence = []
    for name in ("st", "flg", "redup", "eos_fail"):
        if flags.get(name):
            evidence.append((name, span[0], span[1]))
    return DefectReport(
        st=bool(flags.get("st")),
        flg=bool(flags.get("flg")),
        redup=bool(flags.get("redup")),
        eos_fail=bool(flags.get("eos_fail")),
        evidence=tuple(evidence),
    )


_DEFECT_REASONS = (
    ("st", Reason.CAPTION_ST),
    ("flg", Reason.CAPTION_FLG),
    ("redup", Reason.CAPTION_REDUP),
    ("eos_fail", Reason.CAPTION_EOS),
)


def fine_curate(
    record: ClipRecord,
    cfg,
    *,
    caption_emb: Optional[Embedding] = None,
    mean_frame_emb: Optional[Embedding] = None,
    judge_report: Optional[DefectReport] = None,
) -> ClipRecord:
    """Advance a CAPTIONED record to FINE_KEPT or FINE_DROPPED.

    All detectors run (no short-circuiting); the clip-score gate runs only
    when both embeddings are available. A judge_report from an external
    LLM judge replaces the rule-based detectors when supplied.
    """
    from .core import stage_advance

    if record.stage is not Stage.CAPTIONED:
        raise LintError(f"{record.id}: fine_curate requires CAPTIONED, got {record.stage.value}")
    report = judge_report if judge_report is not None else lint_caption(record.caption, cfg)
    reasons = [reason for name, reason in _DEFECT_REASONS if getattr(report, name)]
    tags = record.tags
    if caption_emb is not None and mean_frame_emb is not None:
        score = cosine(caption_emb, mean_frame_emb)
        tags = replace(tags, clip_score=score)
        if score < cfg.clip_score_min:
            reasons.append(Reason.LOW_CLIP_SCORE)
    if reasons:
        return stage_advance(record, Stage.FINE_DROPPED, tags=tags, defects=report,
                             reasons=tuple(reasons))
    return stage_advance(record, Stage.FINE_KEPT, tags=tags, defects=report)


# ---------------------------------------------------------------------------
# Vocabulary statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VocabStats:
    distinct_nouns: int
    distinct_verbs: int
    valid_nouns: int
    valid_verbs: int
    valid_noun_ratio: float
    valid_verb_ratio: float
    avg_nouns_per_caption: float
    avg_verbs_per_caption: float
    avg_caption_len_words: float

    def table(self) -> list:
        header = (
            "distinct_nouns", "valid_nouns", "valid_noun_ratio",
            "distinct_verbs", "valid_verbs", "valid_verb_ratio",
            "avg_nouns_per_caption", "avg_verbs_per_caption", "avg_caption_len_words",
        )
        row = (
            self.distinct_nouns, self.valid_nouns, f"{self.valid_noun_ratio:.4f}",
            self.distinct_verbs, self.valid_verbs, f"{self.valid_verb_ratio:.4f}",
            f"{self.avg_nouns_per_caption:.4f}", f"{self.avg_verbs_per_caption:.4f}",
            f"{self.avg_caption_len_words:.4f}",
        )
        return [header, row]


def vocab_stats(captions: Iterable[str], pos_lexicon: Mapping[str, str],
                valid_min_freq: int) -> VocabStats:
    """Noun/verb vocabulary statistics over a caption corpus.

    A token counts only if the lexicon classifies it; words tagged "both"
    count toward both sides. Valid means corpus frequency strictly above
    valid_min_freq. Unlisted words are ignored everywhere except the
    caption length average, which is over all tokens.
    """
    if not pos_lexicon:
        raise LintError("empty POS lexicon")
    freq = Counter()
    noun_occurrences = 0
    verb_occurrences = 0
    total_tokens = 0
    caption_count = 0
    for caption in captions:
        caption_count += 1
        tokens = tokenize(caption).tokens
        total_tokens += len(tokens)
        for token in tokens:
            pos = pos_lexicon.get(token)
            if pos is None:
                continue
            freq[token] += 1
            if pos in ("noun", "both"):
                noun_occurrences += 1
            if pos in ("verb", "both"):
                verb_occurrences += 1
    nouns = {w for w in freq if pos_lexicon[w] in ("noun", "both")}
    verbs = {w for w in freq if pos_lexicon[w] in ("verb", "both")}
    valid_nouns = sum(1 for w in nouns if freq[w] > valid_min_freq)
    valid_verbs = sum(1 for w in verbs if freq[w] > valid_min_freq)
    return VocabStats(
        distinct_nouns=len(nouns),
        distinct_verbs=len(verbs),
        valid_nouns=valid_nouns,
        valid_verbs=valid_verbs,
        valid_noun_ratio=valid_nouns / len(nouns) if nouns else 0.0,
        valid_verb_ratio=valid_verbs / len(verbs) if verbs else 0.0,
        avg_nouns_per_caption=noun_occurrences / caption_count if caption_count else 0.0,
        avg_verbs_per_caption=verb_occurrences / caption_count if caption_count else 0.0,
        avg_caption_len_words=total_tokens / caption_count if caption_count else 0.0,
    )


def load_pos_lexicon(lines: Iterable[str], source: str = "<lexicon>") -> dict:
    """Parse `word<TAB>pos` lines; pos is noun, verb, or both."""
    lexicon = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or parts[1] not in ("noun", "verb", "both"):
            raise LintError(f"{source}: line {lineno}: expected 'word<TAB>noun|verb|both'")
        lexicon[parts[0].lower()] = parts[1]
    return lexicon


def load_phrase_list(lines: Iterable[str]) -> tuple:
    """One phrase per line; blank lines and # comments ignored."""
    phrases = []
    for raw in lines:
        line = raw.strip()
        if line and not line.startswith("#"):
            phrases.append(line)
    return tuple(phrases)
