"""Slot prediction, correction, strategies, and the summarize pipeline."""

import random

import pytest

from slotsum.backends import BackendResponse, ExtractiveBaseline
from slotsum.errors import BackendError, TemplateParseError
from slotsum.slotfill import (
    PROVENANCE_CORRECTED,
    PROVENANCE_EMPTY,
    PROVENANCE_PREDICTED,
    Correction,
    CorrectionMap,
    FillPlan,
    SlotFill,
    apply_strategy,
    correct_slots,
    format_slot_query,
    predict_slots,
    summarize,
)
from slotsum.templater import parse_template
from slotsum.types import Config, DocumentSet, Entity, FactSet


class FakeBackend:
    """Scripted backend: per-slot-key canned outputs or exceptions."""

    backend_id = "fake"

    def __init__(self, outputs=None, template_markup=""):
        self.outputs = outputs or {}
        self.template_markup = template_markup
        self.requests = []

    def generate(self, request):
        self.requests.append(request)
        if request.task == "template":
            return BackendResponse(self.template_markup, 0.0, self.backend_id)
        result = self.outputs.get(request.slot_key, "")
        if isinstance(result, Exception):
            raise result
        return BackendResponse(result, 0.0, self.backend_id)


def test_format_slot_query_exact_strings():
    assert (
        format_slot_query(
            Entity("peter wichers"), "birth_date", DocumentSet.of("doc text")
        )
        == "[CLS] peter wichers birth_date [SEP] doc text [SEP]"
    )
    assert format_slot_query(Entity("x"), "k", DocumentSet()) == "[CLS] x k [SEP]  [SEP]"
    assert (
        format_slot_query(Entity("a b"), "c", DocumentSet.of("d1", "d2"))
        == "[CLS] a b c [SEP] d1\nd2 [SEP]"
    )


class TestPredictSlots:
    def test_no_slots_means_no_queries(self):
        backend = FakeBackend()
        result = predict_slots(
            Entity("x"), parse_template("plain"), DocumentSet.of("d"), backend
        )
        assert result == {}
        assert backend.requests == []

    def test_collects_nonempty_outputs_once_per_distinct_key(self):
        backend = FakeBackend({"name": "peter", "genre": ""})
        template = parse_template(
            "[SLT] name [/SLT] x [SLT] genre [/SLT] y [SLT] name [/SLT]"
        )
        result = predict_slots(Entity("x"), template, DocumentSet.of("d"), backend)
        assert result == {"name": "peter"}
        assert [r.slot_key for r in backend.requests] == ["name", "genre"]
        assert backend.requests[0].serialized_input == "[CLS] x name [SEP] d [SEP]"

    def test_partial_failure_is_recorded_not_fatal(self):
        backend = FakeBackend({"name": "peter", "genre": BackendError("boom")})
        template = parse_template("[SLT] name [/SLT] [SLT] genre [/SLT]")
        failures = []
        result = predict_slots(
            Entity("x"), template, DocumentSet.of("d"), backend, failures=failures
        )
        assert result == {"name": "peter"}
        assert len(failures) == 1 and "genre" in failures[0]

    def test_total_failure_raises_listing_keys(self):
        backend = FakeBackend(
            {"name": BackendError("a"), "genre": BackendError("b")}
        )
        template = parse_template("[SLT] name [/SLT] [SLT] genre [/SLT]")
        with pytest.raises(BackendError) as err:
            predict_slots(Entity("x"), template, DocumentSet.of("d"), backend)
        assert "genre" in str(err.value) and "name" in str(err.value)

    def test_baseline_extracts_name_from_fixture_doc(self):
        template = parse_template("[SLT] name [/SLT]")
        result = predict_slots(
            Entity("peter wichers"),
            template,
            DocumentSet.of("peter wichers is a swedish guitarist ."),
            ExtractiveBaseline(),
        )
        assert result == {"name": "peter wichers"}


class TestCorrectSlots:
    def test_exact_key_match_scores_one(self):
        template = parse_template("[SLT] birth_date [/SLT]")
        external = FactSet.from_pairs([("birth_date", "12 january 1992")])
        result = correct_slots(template, external, Config())
        assert result.corrected_keys == {"birth_date"}
        assert result.value_of("birth_date") == "12 january 1992"
        assert result.corrections["birth_date"].score == 1.0
        assert result.corrections["birth_date"].external_key == "birth_date"

    def test_dissimilar_keys_stay_uncorrected(self):
        template = parse_template("[SLT] nationality [/SLT]")
        external = FactSet.from_pairs([("genre", "metal")])
        result = correct_slots(template, external, Config())
        assert len(result) == 0

    def test_no_slots_no_corrections(self):
        result = correct_slots(
            parse_template("plain"), FactSet.from_pairs([("a", "b")]), Config()
        )
        assert result.corrected_keys == frozenset()

    def test_best_scoring_external_key_wins(self):
        template = parse_template("[SLT] birth date [/SLT]")
        external = FactSet.from_pairs(
            [("birth_date", "x"), ("date birth", "y"), ("death date", "z")]
        )
        # "date birth" token-sorts identically to "birth date": score 1.0.
        result = correct_slots(template, external, Config())
        assert result.value_of("birth date") == "y"

    def test_equal_scores_break_lexicographically(self):
        template = parse_template("[SLT] name [/SLT]")
        # Both keys are anagram-equal distances from "name".
        external = FactSet.from_pairs([("namey", "b"), ("namex", "a")])
        result = correct_slots(template, external, Config())
        assert result.corrections["name"].external_key == "namex"
        assert result.value_of("name") == "a"

    def test_threshold_is_inclusive(self):
        template = parse_template("[SLT] ab [/SLT]")
        external = FactSet.from_pairs([("b", "v")])
        # sim("ab", "b") = 2/3: kept at delta 2/3, dropped just above.
        kept = correct_slots(template, external, Config(delta=2 / 3))
        assert kept.corrected_keys == {"ab"}
        dropped = correct_slots(template, external, Config(delta=2 / 3 + 1e-9))
        assert dropped.corrected_keys == frozenset()


class TestApplyStrategy:
    template = parse_template("[SLT] a [/SLT] [SLT] b [/SLT]")
    predictions = {"a": "x", "b": "y"}
    corrections = CorrectionMap({"a": Correction("z", "a", 1.0)})

    def test_discard(self):
        plan = apply_strategy("discard", self.template, self.predictions, self.corrections)
        assert plan.fills == {
            "a": SlotFill("z", PROVENANCE_CORRECTED),
            "b": SlotFill("", PROVENANCE_EMPTY),
        }

    def test_predict(self):
        plan = apply_strategy("predict", self.template, self.predictions, self.corrections)
        assert plan.fills == {
            "a": SlotFill("z", PROVENANCE_CORRECTED),
            "b": SlotFill("y", PROVENANCE_PREDICTED),
        }

    def test_all_predict_ignores_corrections(self):
        plan = apply_strategy(
            "all_predict", self.template, self.predictions, self.corrections
        )
        assert plan.fills == {
            "a": SlotFill("x", PROVENANCE_PREDICTED),
            "b": SlotFill("y", PROVENANCE_PREDICTED),
        }

    def test_missing_or_empty_predictions_become_empty_fills(self):
        plan = apply_strategy("predict", self.template, {"b": ""}, CorrectionMap({}))
        assert plan.fills["a"] == SlotFill("", PROVENANCE_EMPTY)
        assert plan.fills["b"] == SlotFill("", PROVENANCE_EMPTY)

    def test_unknown_strategy_rejected(self):
        with pytest.raises(ValueError):
            apply_strategy("keep", self.template, {}, CorrectionMap({}))

    def test_plan_covers_every_slot_key(self):
        rng = random.Random(3)
        keys = [f"k{i}" for i in range(6)]
        for strategy in ("discard", "predict", "all_predict"):
            for _ in range(50):
                chosen = rng.sample(keys, rng.randint(1, 6))
                markup = " ".join(f"[SLT] {k} [/SLT]" for k in chosen)
                template = parse_template(markup)
                predictions = {
                    k: f"v{k}" for k in chosen if rng.random() < 0.5
                }
                corrections = CorrectionMap(
                    {
                        k: Correction(f"c{k}", k, 1.0)
                        for k in chosen
                        if rng.random() < 0.5
                    }
                )
                plan = apply_strategy(strategy, template, predictions, corrections)
                assert set(plan.fills) == set(chosen)


class TestValidationTypes:
    def test_slot_fill_provenance_consistency(self):
        with pytest.raises(ValueError):
            SlotFill("x", "empty")
        with pytest.raises(ValueError):
            SlotFill("", "corrected")
        with pytest.raises(ValueError):
            SlotFill("x", "guessed")

    def test_correction_score_range(self):
        with pytest.raises(ValueError):
            Correction("v", "k", 1.5)

    def test_fill_plan_helpers(self):
        plan = FillPlan(
            {
                "a": SlotFill("x", PROVENANCE_PREDICTED),
                "b": SlotFill("", PROVENANCE_EMPTY),
            }
        )
        assert plan.values_map() == {"a": "x", "b": ""}
        assert plan.filled_keys() == {"a"}
        assert "a" in plan and len(plan) == 2


class TestSummarize:
    def test_given_template_discard_with_matching_external(self):
        template = parse_template("[SLT] name [/SLT] is a painter")
        result = summarize(
            entity=Entity("george burroughs torrey"),
            documents=DocumentSet.of("george burroughs torrey paints portraits ."),
            external=FactSet.from_pairs([("name", "george burroughs torrey")]),
            backend=FakeBackend(),
            config=Config(strategy="discard"),
            template=template,
        )
        assert result.summary.text == "george burroughs torrey is a painter"
        assert result.fill_plan.fills["name"].provenance == PROVENANCE_CORRECTED

    def test_discard_without_knowledge_blanks_and_repairs(self):
        template = parse_template("[SLT] name [/SLT] is a painter")
        result = summarize(
            entity=Entity("x y"),
            documents=DocumentSet.of("doc ."),
            external=FactSet(),
            backend=FakeBackend(),
            config=Config(strategy="discard"),
            template=template,
        )
        assert result.summary.text == "is a painter"

    def test_all_predict_uses_baseline_predictions(self):
        template = parse_template("[SLT] name [/SLT] is a painter")
        result = summarize(
            entity=Entity("george torrey"),
            documents=DocumentSet.of("george torrey , a painter ."),
            external=FactSet.from_pairs([("name", "someone else")]),
            backend=ExtractiveBaseline(),
            config=Config(strategy="all_predict"),
            template=template,
        )
        assert result.summary.text == "george torrey is a painter"
        assert result.fill_plan.fills["name"].provenance == PROVENANCE_PREDICTED
        # Corrections are never consulted under all_predict.
        assert len(result.corrections) == 0

    def test_discard_with_full_corrections_skips_prediction_queries(self):
        backend = FakeBackend()
        template = parse_template("[SLT] name [/SLT] x")
        summarize(
            entity=Entity("e"),
            documents=DocumentSet.of("d"),
            external=FactSet.from_pairs([("name", "v")]),
            backend=backend,
            config=Config(strategy="discard"),
            template=template,
        )
        assert backend.requests == []

    def test_discard_with_uncorrected_slots_still_queries(self):
        backend = FakeBackend({"genre": "jazz"})
        template = parse_template("[SLT] name [/SLT] [SLT] genre [/SLT]")
        result = summarize(
            entity=Entity("e"),
            documents=DocumentSet.of("d"),
            external=FactSet.from_pairs([("name", "v")]),
            backend=backend,
            config=Config(strategy="discard"),
            template=template,
        )
        # The prediction is gathered for the record, never used by discard.
        assert [r.slot_key for r in backend.requests] == ["name", "genre"]
        assert result.predictions == {"genre": "jazz"}
        assert result.fill_plan.fills["genre"] == SlotFill("", PROVENANCE_EMPTY)

    def test_backend_template_is_parsed_strictly_by_default(self):
        backend = FakeBackend(template_markup="[SLT] name [/SLT] is [SLT] broken")
        with pytest.raises(TemplateParseError):
            summarize(
                entity=Entity("e"),
                documents=DocumentSet.of("d"),
                external=FactSet(),
                backend=backend,
                config=Config(),
            )

    def test_recover_markup_downgrades_parse_errors_to_warnings(self):
        backend = FakeBackend(
            {"name": "ann"}, template_markup="[SLT] name [/SLT] is [SLT] broken"
        )
        result = summarize(
            entity=Entity("e"),
            documents=DocumentSet.of("d"),
            external=FactSet(),
            backend=backend,
            config=Config(strategy="all_predict"),
            recover_markup=True,
        )
        assert any("unclosed" in w for w in result.warnings)
        assert result.summary.text == "ann is [SLT] broken"

    def test_generated_template_flows_through(self):
        backend = FakeBackend(
            {"name": "ann lee"}, template_markup="[SLT] name [/SLT] paints ."
        )
        result = summarize(
            entity=Entity("ann lee"),
            documents=DocumentSet.of("ann lee paints ."),
            external=FactSet(),
            backend=backend,
            config=Config(strategy="predict"),
        )
        assert result.template.markup == "[SLT] name [/SLT] paints ."
        assert result.summary.text == "ann lee paints ."
