"""Corpus construction and serialization.

Joins a summarization corpus (documents + summary per entity) with a
fact-table corpus (key/value pairs per entity) by fuzzy abstract
matching, labels train/valid/test splits, serializes fact sets for
knowledge-augmented model inputs, computes corpus statistics, and reads
and writes the JSONL corpus format.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence, TextIO

from .errors import DataError, SlotsumError
from .simtext import jaccard_bow, tokenize
from .templater import parse_template
from .types import (
    CorpusRecord,
    DocumentSet,
    Entity,
    FactSet,
    SummaryText,
    Template,
)

logger = logging.getLogger(__name__)

DEFAULT_MATCH_THRESHOLD = 0.8
DEFAULT_SPLIT_RATIOS = (0.8, 0.1, 0.1)

# Serialization tokens standing in for the [KV1] / [KV2] specials.
KEY_SEP = " | "
PAIR_SEP = " # "
_ESCAPES = (("\\", "\\\\"), ("|", "\\|"), ("#", "\\#"))


# ---------------------------------------------------------------------------
# Corpus alignment


@dataclass(frozen=True)
class MatchCandidate:
    """A proposed alignment between one entry of each source corpus."""

    left_id: str
    right_id: str
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} out of [0, 1]")


@dataclass(frozen=True)
class SummSource:
    """One entry of the summarization-side corpus."""

    id: str
    entity_name: str
    documents: tuple[str, ...]
    summary: str


@dataclass(frozen=True)
class FactSource:
    """One entry of the fact-table-side corpus."""

    id: str
    abstract: str
    facts: tuple[tuple[str, str], ...]


def match_entries(
    left_abstracts: Mapping[str, str],
    right_abstracts: Mapping[str, str],
    threshold: float = DEFAULT_MATCH_THRESHOLD,
) -> list[MatchCandidate]:
    """Align corpora by bag-of-words overlap of their abstracts.

    Each left entry proposes its best-scoring right entry, kept only when
    the score strictly exceeds ``threshold``. Proposals are then resolved
    one-to-one greedily by descending score; entries losing a conflict
    stay unmatched. Ties break lexicographically by id.
    """
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    proposals: list[MatchCandidate] = []
    right_items = sorted(right_abstracts.items())
    for left_id in sorted(left_abstracts):
        left_text = left_abstracts[left_id]
        best: MatchCandidate | None = None
        for right_id, right_text in right_items:
            score = jaccard_bow(left_text, right_text)
            if best is None or score > best.score:
                best = MatchCandidate(left_id, right_id, score)
        if best is not None and best.score > threshold:
            proposals.append(best)

    proposals.sort(key=lambda c: (-c.score, c.left_id, c.right_id))
    taken_right: set[str] = set()
    matches: list[MatchCandidate] = []
    for candidate in proposals:
        if candidate.right_id in taken_right:
            logger.info(
                "dropping match %s -> %s: right entry already taken",
                candidate.left_id,
                candidate.right_id,
            )
            continue
        taken_right.add(candidate.right_id)
        matches.append(candidate)
    return matches


def join_corpora(
    summ_records: Sequence[SummSource],
    fact_records: Sequence[FactSource],
    matches: Sequence[MatchCandidate],
) -> list[CorpusRecord]:
    """Combine matched entries into corpus records.

    Documents and summary come from the left entry, facts from the right.
    Duplicate fact keys keep the first occurrence with a warning; entries
    whose content cannot form a valid record are dropped with a logged
    reason. Matches naming unknown ids raise ``DataError``.
    """
    left_by_id = {r.id: r for r in summ_records}
    right_by_id = {r.id: r for r in fact_records}
    dangling = [
        m.left_id for m in matches if m.left_id not in left_by_id
    ] + [m.right_id for m in matches if m.right_id not in right_by_id]
    if dangling:
        raise DataError("matches reference unknown ids: " + ", ".join(dangling))

    records: list[CorpusRecord] = []
    for match in matches:
        left = left_by_id[match.left_id]
        right = right_by_id[match.right_id]
        try:
            record = CorpusRecord(
                id=left.id,
                entity=Entity(left.entity_name),
                documents=DocumentSet.of(*left.documents),
                summary=SummaryText(left.summary),
                facts=FactSet.from_pairs(right.facts, on_duplicate="first"),
            )
        except (ValueError, TypeError) as exc:
            logger.warning("dropping record %s: %s", left.id, exc)
            continue
        records.append(record)
    return records


# ---------------------------------------------------------------------------
# Fact serialization for knowledge-augmented inputs


def _escape(text: str) -> str:
    for raw, escaped in _ESCAPES:
        text = text.replace(raw, escaped)
    return text


def _unescape(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        if text[i] == "\\" and i + 1 < len(text) and text[i + 1] in "\\|#":
            out.append(text[i + 1])
            i += 2
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def serialize_keys(facts: FactSet) -> str:
    """Join fact keys: ``k1 | k2 | ...``."""
    return KEY_SEP.join(_escape(key) for key in facts.keys())


def serialize_kv(facts: FactSet) -> str:
    """Join fact pairs: ``k1 | v1 # k2 | v2 # ...``."""
    return PAIR_SEP.join(
        f"{_escape(pair.key)}{KEY_SEP}{_escape(pair.value)}" for pair in facts
    )


def _split_unescaped(text: str, sep: str) -> list[str]:
    """Split on a separator whose marker character is not backslashed."""
    parts: list[str] = []
    start = 0
    i = 0
    while i <= len(text) - len(sep):
        if text[i] == "\\":
            i += 2
            continue
        if text[i : i + len(sep)] == sep:
            parts.append(text[start:i])
            start = i + len(sep)
            i = start
            continue
        i += 1
    parts.append(text[start:])
    return parts


def parse_kv(serialized: str) -> FactSet:
    """Inverse of ``serialize_kv``; used to verify the round trip."""
    if serialized == "":
        return FactSet()
    pairs: list[tuple[str, str]] = []
    for chunk in _split_unescaped(serialized, PAIR_SEP):
        fields = _split_unescaped(chunk, KEY_SEP)
        if len(fields) != 2:
            raise DataError(f"malformed key/value chunk {chunk!r}")
        pairs.append((_unescape(fields[0]), _unescape(fields[1])))
    return FactSet.from_pairs(pairs)


def augment_input(serialized: str, document: str) -> str:
    """Prefix a document with serialized facts: ``[CLS] f [SEP] d [SEP]``."""
    return f"[CLS] {serialized} [SEP] {document} [SEP]"


# ---------------------------------------------------------------------------
# Splitting and statistics


def split_corpus(
    records: Sequence[CorpusRecord],
    ratios: tuple[float, float, float] = DEFAULT_SPLIT_RATIOS,
    seed: int = 0,
) -> list[CorpusRecord]:
    """Shuffle deterministically and label contiguous train/valid/test
    partitions; returns the records in shuffled order."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {ratios}")
    if any(r < 0 for r in ratios):
        raise ValueError(f"split ratios must be non-negative, got {ratios}")
    shuffled = list(records)
    random.Random(seed).shuffle(shuffled)
    cut1 = round(len(shuffled) * ratios[0])
    cut2 = round(len(shuffled) * (ratios[0] + ratios[1]))
    labeled: list[CorpusRecord] = []
    for i, record in enumerate(shuffled):
        split = "train" if i < cut1 else "valid" if i < cut2 else "test"
        labeled.append(replace(record, split=split))
    return labeled


@dataclass(frozen=True)
class SlotFrequency:
    """How many records carry a slot key, as count and corpus share."""

    key: str
    count: int
    popularity: float


@dataclass(frozen=True)
class StatsReport:
    """Corpus-level counts and averages.

    ``slot_count`` counts slot occurrences across golden templates;
    the frequency table counts records containing each key, so its
    popularity never exceeds 1. All averages are totals divided by
    ``example_count`` except ``avg_value_len``, which divides by
    ``key_count``.
    """

    example_count: int
    split_counts: Mapping[str, int]
    slot_count: int
    avg_slots_per_example: float
    key_count: int
    avg_keys_per_example: float
    avg_value_len: float
    avg_src_len: float
    avg_tgt_len: float
    slot_frequency: tuple[SlotFrequency, ...]


def corpus_stats(records: Sequence[CorpusRecord]) -> StatsReport:
    """Count slots, keys, and token lengths over the whole corpus."""
    if not records:
        raise DataError("cannot compute statistics of an empty corpus")
    n = len(records)
    split_counts: dict[str, int] = {}
    slot_count = 0
    key_count = 0
    value_tokens = 0
    src_tokens = 0
    tgt_tokens = 0
    presence: dict[str, int] = {}
    for record in records:
        if record.split is not None:
            split_counts[record.split] = split_counts.get(record.split, 0) + 1
        key_count += len(record.facts)
        for pair in record.facts:
            value_tokens += len(tokenize(pair.value))
        src_tokens += len(tokenize(record.documents.joined()))
        tgt_tokens += len(tokenize(record.summary.text))
        if record.template is not None:
            slot_count += len(record.template.slots())
            for key in record.template.slot_keys():
                presence[key] = presence.get(key, 0) + 1

    frequency = tuple(
        SlotFrequency(key, count, count / n)
        for key, count in sorted(presence.items(), key=lambda kv: (-kv[1], kv[0]))
    )
    return StatsReport(
        example_count=n,
        split_counts=split_counts,
        slot_count=slot_count,
        avg_slots_per_example=slot_count / n,
        key_count=key_count,
        avg_keys_per_example=key_count / n,
        avg_value_len=value_tokens / key_count if key_count else 0.0,
        avg_src_len=src_tokens / n,
        avg_tgt_len=tgt_tokens / n,
        slot_frequency=frequency,
    )


def format_stats_table(report: StatsReport) -> str:
    """Aligned plain-text report with the slot-frequency table."""
    lines = [
        f"Examples        {report.example_count}",
    ]
    for split in ("train", "valid", "test"):
        if split in report.split_counts:
            lines.append(f"  {split:<14}{report.split_counts[split]}")
    lines += [
        f"Slots           {report.slot_count}",
        f"Avg. Slots      {report.avg_slots_per_example}",
        f"Keys            {report.key_count}",
        f"Avg. Keys       {report.avg_keys_per_example}",
        f"Avg. Value Len  {report.avg_value_len}",
        f"Avg. Src Len    {report.avg_src_len}",
        f"Avg. Tgt Len    {report.avg_tgt_len}",
        "",
        "Slot | Frequency | Popularity",
    ]
    for entry in report.slot_frequency:
        pct = str(round(entry.popularity * 100, 2)) + "%"
        lines.append(f"{entry.key} | {entry.count} | {pct}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSONL corpus format


def record_to_json(record: CorpusRecord) -> dict:
    """One record as a JSON-compatible dict, stable field order."""
    data: dict = {
        "id": record.id,
        "entity_name": record.entity.name,
        "documents": list(record.documents.texts()),
        "summary": record.summary.text,
        "facts": [{"key": p.key, "value": p.value} for p in record.facts],
        "template": record.template.markup if record.template is not None else None,
        "split": record.split,
    }
    if record.unmatched_slots:
        data["unmatched_slots"] = list(record.unmatched_slots)
    return data


def record_from_json(data: dict) -> CorpusRecord:
    """Parse one JSONL object; schema violations raise ``DataError``."""
    try:
        template_markup = data.get("template")
        template: Template | None = (
            parse_template(template_markup) if template_markup is not None else None
        )
        return CorpusRecord(
            id=str(data["id"]),
            entity=Entity(data["entity_name"]),
            documents=DocumentSet.of(*data["documents"]),
            summary=SummaryText(data["summary"]),
            facts=FactSet.from_pairs(
                [(f["key"], f["value"]) for f in data["facts"]]
            ),
            template=template,
            split=data.get("split"),
            unmatched_slots=tuple(data.get("unmatched_slots", ())),
        )
    except DataError:
        raise
    except (KeyError, TypeError, ValueError, SlotsumError) as exc:
        raise DataError(f"bad corpus record {data.get('id', '<no id>')!r}: {exc}")


def write_records(records: Iterable[CorpusRecord], handle: TextIO) -> int:
    """Write records as JSONL; returns the number written."""
    count = 0
    for record in records:
        handle.write(json.dumps(record_to_json(record), ensure_ascii=False) + "\n")
        count += 1
    return count


def read_records(handle: TextIO) -> list[CorpusRecord]:
    """Read a JSONL corpus; malformed lines raise ``DataError``."""
    records: list[CorpusRecord] = []
    for lineno, line in enumerate(handle, start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"line {lineno}: invalid JSON: {exc}")
        if not isinstance(data, dict):
            raise DataError(f"line {lineno}: expected a JSON object")
        records.append(record_from_json(data))
    return records
