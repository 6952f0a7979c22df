"""Evaluation: ROUGE-1/2/L and slot-level factual accuracy.

ROUGE here is one frozen definition: lowercase whitespace tokens with
punctuation-only tokens removed, no stemming, balanced F1. Scores are
comparable across runs of this toolkit, not across ROUGE packages.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DataError
from .simtext import sorted_indel_sim, tokenize
from .slotfill import PROVENANCE_EMPTY, FillPlan
from .types import CorpusRecord, FactSet, normalize_key


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    def __post_init__(self):
        for value in (self.precision, self.recall, self.f1):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"score {value} out of [0, 1]")


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def rouge_tokens(text: str) -> list[str]:
    """Lowercased whitespace tokens, punctuation-only tokens dropped."""
    return [t for t in tokenize(text) if any(ch.isalnum() for ch in t)]


def _ngrams(tokens: Sequence[str], n: int) -> dict[tuple[str, ...], int]:
    counts: dict[tuple[str, ...], int] = {}
    for i in range(len(tokens) - n + 1):
        gram = tuple(tokens[i : i + n])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def rouge_n(candidate: str, reference: str, n: int) -> RougeScore:
    """Clipped n-gram overlap between tokenized texts.

    Two texts with no n-grams at all count as identical (score 1.0); if
    only one side has none, all scores are 0.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    cand = _ngrams(rouge_tokens(candidate), n)
    ref = _ngrams(rouge_tokens(reference), n)
    cand_total = sum(cand.values())
    ref_total = sum(ref.values())
    if cand_total == 0 and ref_total == 0:
        return RougeScore(1.0, 1.0, 1.0)
    overlap = sum(min(count, ref.get(gram, 0)) for gram, count in cand.items())
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    return RougeScore(precision, recall, _f1(precision, recall))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length over token sequences."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    previous = [0] * (len(b) + 1)
    for item in a:
        current = [0] * (len(b) + 1)
        for j, other in enumerate(b, start=1):
            if item == other:
                current[j] = previous[j - 1] + 1
            else:
                current[j] = max(previous[j], current[j - 1])
        previous = current
    return previous[len(b)]


def rouge_l(candidate: str, reference: str) -> RougeScore:
    """Longest-common-subsequence overlap between tokenized texts."""
    cand = rouge_tokens(candidate)
    ref = rouge_tokens(reference)
    if not cand and not ref:
        return RougeScore(1.0, 1.0, 1.0)
    lcs = lcs_length(cand, ref)
    precision = lcs / len(cand) if cand else 0.0
    recall = lcs / len(ref) if ref else 0.0
    return RougeScore(precision, recall, _f1(precision, recall))


@dataclass(frozen=True)
class FactAccuracyScore:
    """Slot-level counts for one fill plan or a whole corpus.

    ``precision`` is over filled slots only and is vacuously 1.0 when
    nothing was filled; ``recall`` is over all slots and vacuously 1.0
    when there are none.
    """

    exact_correct: int
    fuzzy_correct: int
    filled: int
    total_slots: int

    def __post_init__(self):
        chain = (self.exact_correct, self.fuzzy_correct, self.filled, self.total_slots)
        if any(c < 0 for c in chain):
            raise ValueError("counts must be non-negative")
        if not (chain[0] <= chain[1] <= chain[2] <= chain[3]):
            raise ValueError(
                "counts must satisfy exact <= fuzzy <= filled <= total, "
                f"got {chain}"
            )

    @property
    def precision(self) -> float:
        return self.fuzzy_correct / self.filled if self.filled else 1.0

    @property
    def recall(self) -> float:
        return self.fuzzy_correct / self.total_slots if self.total_slots else 1.0

    def __add__(self, other: "FactAccuracyScore") -> "FactAccuracyScore":
        return FactAccuracyScore(
            self.exact_correct + other.exact_correct,
            self.fuzzy_correct + other.fuzzy_correct,
            self.filled + other.filled,
            self.total_slots + other.total_slots,
        )


def slot_fact_accuracy(
    fill_plan: FillPlan, golden_facts: FactSet, delta: float = 0.8
) -> FactAccuracyScore:
    """Score every slot fill against the golden fact with the same key.

    Empty fills count as unfilled. A fill is exact when it equals the
    golden value as a string, fuzzy when the name-sorted similarity
    reaches ``delta``. Fills whose key has no golden fact count as filled
    but incorrect.
    """
    golden = {normalize_key(p.key): p.value for p in golden_facts}
    exact = fuzzy = filled = 0
    total = len(fill_plan.fills)
    for key, fill in fill_plan.fills.items():
        if fill.provenance == PROVENANCE_EMPTY or fill.value == "":
            continue
        filled += 1
        value = golden.get(normalize_key(key))
        if value is None:
            continue
        if fill.value == value:
            exact += 1
        if sorted_indel_sim(fill.value, value) >= delta:
            fuzzy += 1
    return FactAccuracyScore(exact, fuzzy, filled, total)


@dataclass(frozen=True)
class GeneratedOutput:
    """One system output to score: a summary and, when the generator was
    slot-based, the fill plan behind it."""

    record_id: str
    summary: str
    fill_plan: FillPlan | None = None


@dataclass(frozen=True)
class EvaluationReport:
    """Macro-averaged corpus metrics plus summed fact-accuracy counts."""

    example_count: int
    rouge_1: RougeScore
    rouge_2: RougeScore
    rouge_l: RougeScore
    fact_counts: FactAccuracyScore
    fact_precision: float
    fact_recall: float
    fact_scored_examples: int

    def to_json_dict(self) -> dict:
        def rouge_dict(score: RougeScore) -> dict:
            return {
                "precision": round(score.precision, 6),
                "recall": round(score.recall, 6),
                "f1": round(score.f1, 6),
            }

        return {
            "example_count": self.example_count,
            "rouge_1": rouge_dict(self.rouge_1),
            "rouge_2": rouge_dict(self.rouge_2),
            "rouge_l": rouge_dict(self.rouge_l),
            "fact_accuracy": {
                "exact_correct": self.fact_counts.exact_correct,
                "fuzzy_correct": self.fact_counts.fuzzy_correct,
                "filled": self.fact_counts.filled,
                "total_slots": self.fact_counts.total_slots,
                "precision": round(self.fact_precision, 6),
                "recall": round(self.fact_recall, 6),
                "scored_examples": self.fact_scored_examples,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, ensure_ascii=False) + "\n"

    def format_table(self) -> str:
        rows = [
            ("Metric", "P", "R", "F1"),
            (
                "ROUGE-1",
                f"{self.rouge_1.precision:.4f}",
                f"{self.rouge_1.recall:.4f}",
                f"{self.rouge_1.f1:.4f}",
            ),
            (
                "ROUGE-2",
                f"{self.rouge_2.precision:.4f}",
                f"{self.rouge_2.recall:.4f}",
                f"{self.rouge_2.f1:.4f}",
            ),
            (
                "ROUGE-L",
                f"{self.rouge_l.precision:.4f}",
                f"{self.rouge_l.recall:.4f}",
                f"{self.rouge_l.f1:.4f}",
            ),
            (
                "Fact",
                f"{self.fact_precision:.4f}",
                f"{self.fact_recall:.4f}",
                "-",
            ),
        ]
        widths = [max(len(row[i]) for row in rows) for i in range(4)]
        lines = [
            "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
            for row in rows
        ]
        lines.append(
            f"examples={self.example_count} "
            f"fact_scored={self.fact_scored_examples} "
            f"filled={self.fact_counts.filled}/{self.fact_counts.total_slots}"
        )
        return "\n".join(lines) + "\n"


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def _macro_rouge(scores: Sequence[RougeScore]) -> RougeScore:
    return RougeScore(
        _mean([s.precision for s in scores]),
        _mean([s.recall for s in scores]),
        _mean([s.f1 for s in scores]),
    )


def evaluate_corpus(
    records: Sequence[CorpusRecord],
    outputs: Sequence[GeneratedOutput],
    delta: float = 0.8,
) -> EvaluationReport:
    """Score outputs against reference summaries and golden facts.

    The output id set must equal the record id set. ROUGE is
    macro-averaged over all records; fact accuracy is macro-averaged over
    the outputs that carry a fill plan, with raw counts summed alongside.
    """
    if not records:
        raise DataError("cannot evaluate an empty corpus")
    by_id: Mapping[str, GeneratedOutput] = {o.record_id: o for o in outputs}
    record_ids = {r.id for r in records}
    missing = sorted(record_ids - set(by_id))
    extra = sorted(set(by_id) - record_ids)
    if missing or extra:
        raise DataError(
            f"output ids do not cover the corpus: missing={missing} extra={extra}"
        )
    if len(outputs) != len(by_id):
        raise DataError("duplicate output ids")

    r1: list[RougeScore] = []
    r2: list[RougeScore] = []
    rl: list[RougeScore] = []
    fact_total = FactAccuracyScore(0, 0, 0, 0)
    fact_precisions: list[float] = []
    fact_recalls: list[float] = []
    for record in records:
        output = by_id[record.id]
        r1.append(rouge_n(output.summary, record.summary.text, 1))
        r2.append(rouge_n(output.summary, record.summary.text, 2))
        rl.append(rouge_l(output.summary, record.summary.text))
        if output.fill_plan is not None:
            score = slot_fact_accuracy(output.fill_plan, record.facts, delta)
            fact_total = fact_total + score
            fact_precisions.append(score.precision)
            fact_recalls.append(score.recall)

    return EvaluationReport(
        example_count=len(records),
        rouge_1=_macro_rouge(r1),
        rouge_2=_macro_rouge(r2),
        rouge_l=_macro_rouge(rl),
        fact_counts=fact_total,
        fact_precision=_mean(fact_precisions) if fact_precisions else 1.0,
        fact_recall=_mean(fact_recalls) if fact_recalls else 1.0,
        fact_scored_examples=len(fact_precisions),
    )
