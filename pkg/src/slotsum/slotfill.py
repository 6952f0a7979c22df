"""Slot filling: predict values from documents, correct them against
external knowledge, and combine both under a fill strategy.

The three strategies trade factual precision against coverage:
``discard`` keeps only externally corrected values and blanks the rest,
``predict`` backfills uncorrected slots with model predictions, and
``all_predict`` uses predictions everywhere and ignores corrections.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping

from .backends import TASK_SLOT, TASK_TEMPLATE, Backend, BackendRequest
from .errors import BackendError
from .simtext import sorted_indel_sim
from .templater import parse_template, parse_template_lenient, render
from .types import (
    Config,
    DocumentSet,
    Entity,
    FactSet,
    SummaryText,
    Template,
)

logger = logging.getLogger(__name__)

PROVENANCE_CORRECTED = "corrected"
PROVENANCE_PREDICTED = "predicted"
PROVENANCE_EMPTY = "empty"

# Map slot key -> predicted value; values are always non-empty strings.
PredictionMap = dict[str, str]


@dataclass(frozen=True)
class Correction:
    """An external fact adopted for a slot, with its matching evidence."""

    value: str
    external_key: str
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} out of [0, 1]")


@dataclass(frozen=True)
class CorrectionMap:
    """Slot keys resolved against external knowledge."""

    corrections: Mapping[str, Correction] = field(default_factory=dict)

    @property
    def corrected_keys(self) -> frozenset[str]:
        return frozenset(self.corrections)

    def value_of(self, key: str) -> str:
        return self.corrections[key].value

    def __contains__(self, key: str) -> bool:
        return key in self.corrections

    def __len__(self) -> int:
        return len(self.corrections)


@dataclass(frozen=True)
class SlotFill:
    """Final value chosen for one slot and where it came from."""

    value: str
    provenance: str

    def __post_init__(self):
        if self.provenance not in (
            PROVENANCE_CORRECTED,
            PROVENANCE_PREDICTED,
            PROVENANCE_EMPTY,
        ):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.provenance == PROVENANCE_EMPTY and self.value != "":
            raise ValueError("empty provenance requires an empty value")
        if self.provenance != PROVENANCE_EMPTY and self.value == "":
            raise ValueError("a filled slot requires a non-empty value")


@dataclass(frozen=True)
class FillPlan:
    """One fill per template slot key; feeds straight into rendering."""

    fills: Mapping[str, SlotFill] = field(default_factory=dict)

    def values_map(self) -> dict[str, str]:
        return {key: fill.value for key, fill in self.fills.items()}

    def filled_keys(self) -> frozenset[str]:
        return frozenset(
            key
            for key, fill in self.fills.items()
            if fill.provenance != PROVENANCE_EMPTY
        )

    def __contains__(self, key: str) -> bool:
        return key in self.fills

    def __len__(self) -> int:
        return len(self.fills)


@dataclass(frozen=True)
class SummarizeResult:
    """A rendered summary plus every intermediate artifact that shaped it."""

    summary: SummaryText
    template: Template
    fill_plan: FillPlan
    predictions: Mapping[str, str]
    corrections: CorrectionMap
    warnings: tuple[str, ...] = ()


def format_slot_query(entity: Entity, key: str, documents: DocumentSet) -> str:
    """Serialize one slot query: ``[CLS] name key [SEP] documents [SEP]``.

    Documents are newline-joined; an empty document set leaves the double
    space between the separators.
    """
    return f"[CLS] {entity.name} {key} [SEP] {documents.joined()} [SEP]"


def predict_slots(
    entity: Entity,
    template: Template,
    documents: DocumentSet,
    backend: Backend,
    failures: list[str] | None = None,
) -> PredictionMap:
    """Query the backend once per distinct slot key.

    Empty outputs and per-key backend failures leave the key out of the
    map; failures are logged and, when ``failures`` is given, appended to
    it. If every key fails the whole operation raises ``BackendError``.
    """
    predictions: PredictionMap = {}
    failed: list[str] = []
    keys = template.slot_keys()
    for key in keys:
        request = BackendRequest(
            task=TASK_SLOT,
            entity_name=entity.name,
            documents=documents.texts(),
            slot_key=key,
            serialized_input=format_slot_query(entity, key, documents),
        )
        try:
            response = backend.generate(request)
        except BackendError as exc:
            message = f"slot {key!r}: backend failed: {exc}"
            logger.warning("%s", message)
            failed.append(key)
            if failures is not None:
                failures.append(message)
            continue
        if response.output:
            predictions[key] = response.output
    if keys and len(failed) == len(keys):
        raise BackendError(
            "backend failed for every slot key: " + ", ".join(sorted(failed))
        )
    return predictions


def correct_slots(
    template: Template, external: FactSet, config: Config
) -> CorrectionMap:
    """Match each slot key against external fact keys by name similarity.

    The best-scoring external key wins (ties broken lexicographically);
    the slot adopts that fact's value when the score reaches
    ``config.delta``.
    """
    facts = sorted(external, key=lambda f: f.key)
    corrections: dict[str, Correction] = {}
    for slot_key in template.slot_keys():
        best: Correction | None = None
        for fact in facts:
            score = sorted_indel_sim(slot_key, fact.key)
            if best is None or score > best.score:
                best = Correction(fact.value, fact.key, score)
        if best is not None and best.score >= config.delta:
            corrections[slot_key] = best
    return CorrectionMap(corrections)


def apply_strategy(
    strategy: str,
    template: Template,
    predictions: Mapping[str, str],
    corrections: CorrectionMap,
) -> FillPlan:
    """Build the fill plan for every template slot key.

    discard: corrected value or empty. predict: corrected value, else
    prediction, else empty. all_predict: prediction or empty, corrections
    ignored. A missing or empty prediction counts as empty.
    """
    fills: dict[str, SlotFill] = {}
    for key in template.slot_keys():
        predicted = predictions.get(key, "")
        if strategy == "discard":
            fill = (
                SlotFill(corrections.value_of(key), PROVENANCE_CORRECTED)
                if key in corrections
                else SlotFill("", PROVENANCE_EMPTY)
            )
        elif strategy == "predict":
            if key in corrections:
                fill = SlotFill(corrections.value_of(key), PROVENANCE_CORRECTED)
            elif predicted:
                fill = SlotFill(predicted, PROVENANCE_PREDICTED)
            else:
                fill = SlotFill("", PROVENANCE_EMPTY)
        elif strategy == "all_predict":
            fill = (
                SlotFill(predicted, PROVENANCE_PREDICTED)
                if predicted
                else SlotFill("", PROVENANCE_EMPTY)
            )
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        fills[key] = fill
    return FillPlan(fills)


def summarize(
    entity: Entity,
    documents: DocumentSet,
    external: FactSet,
    backend: Backend,
    config: Config,
    template: Template | None = None,
    recover_markup: bool = False,
) -> SummarizeResult:
    """Run the full pipeline: template, predictions, corrections, render.

    When no template is supplied the backend generates one and its markup
    is parsed strictly, or leniently (malformed regions kept as literals,
    one warning each) when ``recover_markup`` is set. Prediction queries
    are skipped when the strategy never reads them (discard with every
    slot corrected); the correction step is skipped under all_predict.
    """
    warnings: list[str] = []
    if template is None:
        request = BackendRequest(
            task=TASK_TEMPLATE,
            entity_name=entity.name,
            documents=documents.texts(),
            slot_key="",
            serialized_input=documents.joined(),
        )
        response = backend.generate(request)
        if recover_markup:
            template, parse_warnings = parse_template_lenient(response.output)
            warnings.extend(parse_warnings)
        else:
            template = parse_template(response.output)

    if config.strategy == "all_predict":
        corrections = CorrectionMap({})
    else:
        corrections = correct_slots(template, external, config)

    slot_keys = template.slot_keys()
    skip_predictions = config.strategy == "discard" and all(
        key in corrections for key in slot_keys
    )
    if skip_predictions:
        predictions: PredictionMap = {}
    else:
        predictions = predict_slots(
            entity, template, documents, backend, failures=warnings
        )

    fill_plan = apply_strategy(config.strategy, template, predictions, corrections)
    summary = render(template, fill_plan.values_map())
    return SummarizeResult(
        summary=summary,
        template=template,
        fill_plan=fill_plan,
        predictions=predictions,
        corrections=corrections,
        warnings=tuple(warnings),
    )
