"""Golden template construction and slot markup handling.

A golden template is built from a (summary, facts) pair by locating, for
each fact value, the best fuzzy-matching token span of the summary and
replacing it with a slot when the match score reaches the threshold.
This module also owns the markup grammar (parse/render) used everywhere
templates cross a text boundary.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .errors import TemplateParseError
from .simtext import indel_similarity, sorted_join, tokenize
from .types import (
    SLOT_CLOSE,
    SLOT_OPEN,
    Config,
    FactSet,
    LiteralText,
    Slot,
    SummaryText,
    Template,
    normalize_key,
)

_TOKEN_RE = re.compile(r"\S+")

# Punctuation that should attach directly to the preceding word after an
# empty fill is removed.
_CLINGING_PUNCT = (".", ",", ";", ":")


@dataclass(frozen=True)
class SpanMatch:
    """A candidate summary span matched against one fact value."""

    start: int
    end: int
    matched_text: str
    score: float
    fact_key: str

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError("span must satisfy start < end")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} out of [0, 1]")

    def overlaps(self, other: "SpanMatch") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class TemplateBuildReport:
    """How each fact key fared during template construction.

    ``replaced`` holds the accepted span matches sorted by start;
    ``skipped_facts`` are keys whose best score fell below the threshold;
    ``overlap_dropped`` are keys that lost a span conflict.
    """

    replaced: tuple[SpanMatch, ...] = ()
    skipped_facts: tuple[str, ...] = ()
    overlap_dropped: tuple[str, ...] = ()

    def __post_init__(self):
        for left, right in zip(self.replaced, self.replaced[1:]):
            if left.start > right.start:
                raise ValueError("replaced spans must be sorted by start")
            if left.overlaps(right):
                raise ValueError("replaced spans must not overlap")


def make_slot_markup(key: str) -> str:
    """Render one slot as markup: ``[SLT] key [/SLT]`` with single spaces.

    Raises ``MarkupInjectionError`` if the key contains a delimiter token.
    """
    return Slot(key).markup


def token_spans(text: str) -> list[tuple[int, int]]:
    """Character offsets of every whitespace-delimited token."""
    return [m.span() for m in _TOKEN_RE.finditer(text)]


def best_matching_span(
    summary: SummaryText, value: str, slack: int, fact_key: str = ""
) -> SpanMatch | None:
    """Best-scoring contiguous token window of the summary for ``value``.

    Candidate windows span ``max(1, n - slack)`` to ``n + slack`` tokens,
    where ``n`` is the value's token count. Ties go to the earlier start,
    then the shorter window. Returns ``None`` when the summary has no
    tokens or no window of an allowed width fits in it.
    """
    value_tokens = tokenize(value)
    if not value_tokens:
        raise ValueError("value must contain at least one token")
    spans = token_spans(summary.text)
    if not spans:
        return None

    lo = max(1, len(value_tokens) - slack)
    hi = len(value_tokens) + slack
    prepared_value = sorted_join(value)

    best: SpanMatch | None = None
    for i in range(len(spans)):
        for width in range(lo, hi + 1):
            j = i + width - 1
            if j >= len(spans):
                break
            start, end = spans[i][0], spans[j][1]
            window = summary.text[start:end]
            score = indel_similarity(prepared_value, sorted_join(window))
            if best is None or score > best.score:
                best = SpanMatch(start, end, window, score, fact_key)
    return best


def build_golden_template(
    summary: SummaryText, facts: FactSet, config: Config
) -> tuple[Template, TemplateBuildReport]:
    """Replace fact values in the summary with slots where similarity
    reaches ``config.delta``; everything else stays literal text.

    Overlapping candidate spans are resolved by descending score, ties by
    longer fact value and then lexicographic key, so the result is
    deterministic. Each fact is replaced at most once (its single best
    span).
    """
    scored: list[tuple[SpanMatch, str]] = []
    skipped: list[str] = []
    for fact in facts:
        match = best_matching_span(
            summary, fact.value, config.span_window_slack, fact_key=fact.key
        )
        if match is None or match.score < config.delta:
            skipped.append(fact.key)
        else:
            scored.append((match, fact.value))

    scored.sort(key=lambda item: (-item[0].score, -len(item[1]), item[0].fact_key))
    accepted: list[SpanMatch] = []
    dropped: list[str] = []
    for match, _value in scored:
        if any(match.overlaps(kept) for kept in accepted):
            dropped.append(match.fact_key)
        else:
            accepted.append(match)
    accepted.sort(key=lambda m: m.start)

    segments: list = []
    cursor = 0
    for match in accepted:
        if match.start > cursor:
            segments.append(LiteralText(summary.text[cursor : match.start]))
        segments.append(Slot(match.fact_key))
        cursor = match.end
    if cursor < len(summary.text):
        segments.append(LiteralText(summary.text[cursor:]))
    if not segments and summary.text:
        segments.append(LiteralText(summary.text))

    template = Template.from_segments(segments)
    report = TemplateBuildReport(tuple(accepted), tuple(skipped), tuple(dropped))
    return template, report


def _scan_markup(markup: str, recover: bool) -> tuple[Template, list[str]]:
    segments: list = []
    literal_parts: list[str] = []
    warnings: list[str] = []

    def flush_literal():
        if literal_parts:
            segments.append(LiteralText("".join(literal_parts)))
            literal_parts.clear()

    pos = 0
    while pos < len(markup):
        open_at = markup.find(SLOT_OPEN, pos)
        close_at = markup.find(SLOT_CLOSE, pos)
        if open_at == -1 and close_at == -1:
            literal_parts.append(markup[pos:])
            break
        if close_at != -1 and (open_at == -1 or close_at < open_at):
            if not recover:
                raise TemplateParseError("unmatched [/SLT]", offset=close_at)
            warnings.append(f"unmatched [/SLT] at offset {close_at}; kept as literal")
            literal_parts.append(markup[pos : close_at + len(SLOT_CLOSE)])
            pos = close_at + len(SLOT_CLOSE)
            continue

        literal_parts.append(markup[pos:open_at])
        body_start = open_at + len(SLOT_OPEN)
        close_at = markup.find(SLOT_CLOSE, body_start)
        reopen_at = markup.find(SLOT_OPEN, body_start)
        if reopen_at != -1 and (close_at == -1 or reopen_at < close_at):
            if not recover:
                raise TemplateParseError("nested [SLT]", offset=reopen_at)
            warnings.append(
                f"[SLT] at offset {open_at} reopened before closing; kept as literal"
            )
            literal_parts.append(markup[open_at:reopen_at])
            pos = reopen_at
            continue
        if close_at == -1:
            if not recover:
                raise TemplateParseError("unclosed [SLT]", offset=open_at)
            warnings.append(f"unclosed [SLT] at offset {open_at}; kept as literal")
            literal_parts.append(markup[open_at:])
            break

        key = markup[body_start:close_at].strip()
        if not key:
            if not recover:
                raise TemplateParseError("empty slot key", offset=open_at)
            warnings.append(f"empty slot key at offset {open_at}; kept as literal")
            literal_parts.append(markup[open_at : close_at + len(SLOT_CLOSE)])
            pos = close_at + len(SLOT_CLOSE)
            continue
        flush_literal()
        segments.append(Slot(key))
        pos = close_at + len(SLOT_CLOSE)

    flush_literal()
    return Template.from_segments(segments), warnings


def parse_template(markup: str) -> Template:
    """Parse slot markup strictly; malformed delimiters raise
    ``TemplateParseError`` with the character offset."""
    template, _ = _scan_markup(markup, recover=False)
    return template


def parse_template_lenient(markup: str) -> tuple[Template, list[str]]:
    """Parse slot markup, keeping malformed delimiter regions as literal
    text and returning a warning per recovered region."""
    return _scan_markup(markup, recover=True)


def _join_repaired(left: str, right: str) -> str:
    """Join two text pieces across a removed (empty-fill) slot.

    Runs of spaces at the seam collapse to one; punctuation that would be
    left dangling attaches directly to the preceding word.
    """
    left = left.rstrip(" ")
    right = right.lstrip(" ")
    if not left or not right:
        return left + right
    if right.startswith(_CLINGING_PUNCT):
        return left + right
    return left + " " + right


def render(template: Template, fills: Mapping[str, str]) -> SummaryText:
    """Fill slots and concatenate.

    Keys are matched after normalization; slots absent from ``fills`` (or
    filled with the empty string) are removed, and the surrounding
    whitespace is repaired so the text stays fluent. When every slot has a
    non-empty fill the output is the plain concatenation, character-exact.
    """
    lookup = {normalize_key(k): v for k, v in fills.items()}
    out = ""
    pending_repair = False
    for seg in template.segments:
        piece = (
            seg.text
            if isinstance(seg, LiteralText)
            else lookup.get(normalize_key(seg.key), "")
        )
        if isinstance(seg, Slot) and piece == "":
            pending_repair = True
            continue
        if pending_repair:
            if not piece.strip(" "):
                # Whitespace-only literal between two removed slots: the
                # seam stays open until real content arrives.
                continue
            out = _join_repaired(out, piece)
            pending_repair = False
        else:
            out += piece
    if pending_repair:
        out = out.rstrip(" ")
    return SummaryText(out)
