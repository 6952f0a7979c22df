"""Corpus alignment, fact serialization, splits, stats, and JSONL I/O."""

import io
import json
import random
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from slotsum.dataset import (
    FactSource,
    MatchCandidate,
    SummSource,
    augment_input,
    corpus_stats,
    format_stats_table,
    join_corpora,
    match_entries,
    parse_kv,
    read_records,
    record_from_json,
    record_to_json,
    serialize_keys,
    serialize_kv,
    split_corpus,
    write_records,
)
from slotsum.errors import DataError
from slotsum.types import (
    CorpusRecord,
    DocumentSet,
    Entity,
    FactSet,
    SummaryText,
)

DATA = Path(__file__).parent / "data"


def load_fixture_records():
    with open(DATA / "corpus_10.jsonl", encoding="utf-8") as handle:
        return read_records(handle)


class TestMatchEntries:
    def test_identical_abstracts_match(self):
        matches = match_entries({"l1": "a b c"}, {"r1": "a b c"})
        assert matches == [MatchCandidate("l1", "r1", 1.0)]

    def test_score_exactly_at_threshold_is_rejected(self):
        # 4 shared tokens over a 5-token union: score 0.8 precisely.
        matches = match_entries({"l1": "a b c d"}, {"r1": "a b c d e"})
        assert matches == []

    def test_score_just_above_threshold_is_kept(self):
        # 5 shared over 6: 0.8333...
        matches = match_entries({"l1": "a b c d e"}, {"r1": "a b c d e f"})
        assert len(matches) == 1
        assert matches[0].score == pytest.approx(5 / 6)

    def test_conflicting_proposals_resolve_by_score(self):
        left = {"l1": "a b c d e", "l2": "a b c d e f"}
        right = {"r1": "a b c d e f"}
        matches = match_entries(left, right)
        # Both lefts propose r1; the perfect match wins, the loser
        # stays unmatched rather than being reassigned.
        assert matches == [MatchCandidate("l2", "r1", 1.0)]

    def test_equal_scores_break_by_left_id(self):
        left = {"lb": "a b c d e", "la": "a b c d e"}
        right = {"r1": "a b c d e"}
        matches = match_entries(left, right)
        assert matches == [MatchCandidate("la", "r1", 1.0)]

    def test_threshold_validated(self):
        with pytest.raises(ValueError):
            match_entries({}, {}, threshold=0.0)

    def test_deterministic_across_dict_order(self):
        left_a = {"l1": "x y z w v", "l2": "p q r s t"}
        left_b = dict(reversed(list(left_a.items())))
        right = {"r1": "x y z w v", "r2": "p q r s t"}
        assert match_entries(left_a, right) == match_entries(left_b, right)


class TestJoinCorpora:
    summ = [SummSource("l1", "ann lee", ("doc one .",), "ann lee paints .")]
    facts = [FactSource("f1", "ann lee paints .", (("name", "ann lee"),))]

    def test_join_carries_both_sides(self):
        records = join_corpora(
            self.summ, self.facts, [MatchCandidate("l1", "f1", 1.0)]
        )
        assert len(records) == 1
        record = records[0]
        assert record.id == "l1"
        assert record.entity.name == "ann lee"
        assert record.facts.get("name") == "ann lee"
        assert record.template is None

    def test_dangling_ids_raise(self):
        with pytest.raises(DataError) as err:
            join_corpora(self.summ, self.facts, [MatchCandidate("l1", "zz", 1.0)])
        assert "zz" in str(err.value)

    def test_duplicate_fact_keys_keep_first(self, caplog):
        facts = [
            FactSource("f1", "x", (("name", "first"), ("name", "second")))
        ]
        with caplog.at_level("WARNING"):
            records = join_corpora(
                self.summ, facts, [MatchCandidate("l1", "f1", 1.0)]
            )
        assert records[0].facts.get("name") == "first"

    def test_invalid_entry_dropped_with_warning(self, caplog):
        summ = [SummSource("l1", "", ("doc .",), "summary .")]
        with caplog.at_level("WARNING"):
            records = join_corpora(
                summ, self.facts, [MatchCandidate("l1", "f1", 1.0)]
            )
        assert records == []
        assert any("l1" in message for message in caplog.messages)


class TestSerialization:
    def test_serialize_kv_fixture(self):
        facts = FactSet.from_pairs([("name", "john"), ("birth_date", "1990")])
        assert serialize_kv(facts) == "name | john # birth_date | 1990"

    def test_serialize_keys_fixture(self):
        facts = FactSet.from_pairs([("name", "john"), ("birth_date", "1990")])
        assert serialize_keys(facts) == "name | birth_date"
        assert serialize_keys(FactSet()) == ""
        assert serialize_keys(FactSet.from_pairs([("name", "x")])) == "name"

    def test_empty_factset(self):
        assert serialize_kv(FactSet()) == ""
        assert parse_kv("") == FactSet()

    def test_delimiters_inside_values_survive(self):
        facts = FactSet.from_pairs([("ratio", "a | b # c"), ("path", "x\\y")])
        round_tripped = parse_kv(serialize_kv(facts))
        assert round_tripped.get("ratio") == "a | b # c"
        assert round_tripped.get("path") == "x\\y"

    def test_parse_kv_inverts_fixture(self):
        parsed = parse_kv("name | john # birth_date | 1990")
        assert parsed.get("name") == "john"
        assert parsed.get("birth_date") == "1990"

    def test_malformed_pair_raises(self):
        with pytest.raises(DataError):
            parse_kv("name john")

    text = st.text(
        alphabet=st.characters(whitelist_categories=("Ll", "Nd"), whitelist_characters=" |#\\"),
        min_size=1,
        max_size=12,
    ).filter(lambda s: s.strip())

    @given(st.lists(st.tuples(text, text), min_size=1, max_size=6, unique_by=lambda kv: kv[0].lower().strip()))
    def test_round_trip_identity(self, pairs):
        facts = FactSet.from_pairs(pairs)
        assert parse_kv(serialize_kv(facts)) == facts

    def test_augment_input(self):
        assert (
            augment_input("name | john", "john paints .")
            == "[CLS] name | john [SEP] john paints . [SEP]"
        )


def make_records(n):
    return [
        CorpusRecord(
            id=f"r{i:02d}",
            entity=Entity(f"entity {i}"),
            documents=DocumentSet.of(f"doc {i} ."),
            summary=SummaryText(f"entity {i} text ."),
            facts=FactSet.from_pairs([("name", f"entity {i}")]),
        )
        for i in range(n)
    ]


class TestSplitCorpus:
    def test_default_ratios_on_ten(self):
        result = split_corpus(make_records(10))
        counts = {}
        for record in result:
            counts[record.split] = counts.get(record.split, 0) + 1
        assert counts == {"train": 8, "valid": 1, "test": 1}

    def test_same_seed_same_order(self):
        a = split_corpus(make_records(10), seed=7)
        b = split_corpus(make_records(10), seed=7)
        assert [r.id for r in a] == [r.id for r in b]
        assert [r.split for r in a] == [r.split for r in b]

    def test_different_seed_usually_differs(self):
        a = split_corpus(make_records(10), seed=0)
        b = split_corpus(make_records(10), seed=1)
        assert [r.id for r in a] != [r.id for r in b]

    def test_ratios_must_sum_to_one(self):
        with pytest.raises(ValueError):
            split_corpus(make_records(4), ratios=(0.5, 0.2, 0.2))

    def test_partition_is_exhaustive(self):
        rng = random.Random(5)
        for _ in range(10):
            n = rng.randint(3, 40)
            result = split_corpus(make_records(n), seed=rng.randint(0, 99))
            assert sorted(r.id for r in result) == [f"r{i:02d}" for i in range(n)]
            assert all(r.split in ("train", "valid", "test") for r in result)


class TestCorpusStats:
    def test_empty_corpus_rejected(self):
        with pytest.raises(DataError):
            corpus_stats([])

    def test_two_record_averages(self):
        records = [
            CorpusRecord(
                id="a",
                entity=Entity("ann"),
                documents=DocumentSet.of("one two three four"),
                summary=SummaryText("one two"),
                facts=FactSet.from_pairs([("name", "ann"), ("job", "painter x")]),
            ),
            CorpusRecord(
                id="b",
                entity=Entity("bo"),
                documents=DocumentSet.of("one two"),
                summary=SummaryText("one two three four five six"),
                facts=FactSet.from_pairs([("name", "bo"), ("job", "poet")]),
            ),
        ]
        report = corpus_stats(records)
        assert report.example_count == 2
        assert report.slot_count == 0
        assert report.key_count == 4
        assert report.avg_keys_per_example == 2.0
        assert report.avg_value_len == pytest.approx(5 / 4)
        assert report.avg_src_len == 3.0
        assert report.avg_tgt_len == 4.0
        assert report.slot_frequency == ()

    def test_fixture_statistics(self):
        report = corpus_stats(load_fixture_records())
        assert report.example_count == 10
        assert report.split_counts == {"train": 8, "valid": 1, "test": 1}
        assert report.slot_count == 43
        assert report.avg_slots_per_example == pytest.approx(4.3)
        assert report.key_count == 43
        assert report.avg_value_len == pytest.approx(68 / 43)
        assert report.avg_src_len == pytest.approx(15.1)
        assert report.avg_tgt_len == pytest.approx(13.4)
        top = report.slot_frequency[0]
        assert (top.key, top.count, top.popularity) == ("name", 10, 1.0)

    def test_fixture_table_matches_golden(self):
        report = corpus_stats(load_fixture_records())
        golden = (DATA / "golden" / "stats.txt").read_text(encoding="utf-8")
        assert format_stats_table(report) == golden


class TestJsonl:
    def test_round_trip_preserves_fields(self):
        records = load_fixture_records()
        buffer = io.StringIO()
        count = write_records(records, buffer)
        assert count == len(records)
        buffer.seek(0)
        assert read_records(buffer) == records

    def test_record_json_shape(self):
        record = load_fixture_records()[0]
        data = record_to_json(record)
        assert list(data)[:4] == ["id", "entity_name", "documents", "summary"]
        assert isinstance(data["facts"], list)
        assert all(set(f) == {"key", "value"} for f in data["facts"])
        assert isinstance(data["template"], str)

    def test_template_null_when_absent(self):
        record = make_records(1)[0]
        assert record_to_json(record)["template"] is None

    def test_missing_field_raises_data_error(self):
        data = record_to_json(load_fixture_records()[0])
        del data["summary"]
        with pytest.raises(DataError):
            record_from_json(data)

    def test_bad_template_markup_raises_data_error(self):
        data = record_to_json(load_fixture_records()[0])
        data["template"] = "[SLT] name"
        with pytest.raises(DataError):
            record_from_json(data)

    def test_blank_lines_skipped(self):
        records = load_fixture_records()[:2]
        buffer = io.StringIO()
        write_records(records, buffer)
        text = buffer.getvalue().replace("\n", "\n\n")
        assert read_records(io.StringIO(text)) == records

    def test_invalid_json_reports_line_number(self):
        record = load_fixture_records()[0]
        good_line = json.dumps(record_to_json(record), ensure_ascii=False)
        with pytest.raises(DataError) as err:
            read_records(io.StringIO(good_line + "\nnot json\n"))
        assert "2" in str(err.value)

    def test_unicode_written_verbatim(self):
        record = CorpusRecord(
            id="u1",
            entity=Entity("josé maría"),
            documents=DocumentSet.of("josé maría paints ."),
            summary=SummaryText("josé maría ."),
            facts=FactSet.from_pairs([("name", "josé maría")]),
        )
        buffer = io.StringIO()
        write_records([record], buffer)
        assert "josé" in buffer.getvalue()
        line = json.loads(buffer.getvalue())
        assert line["entity_name"] == "josé maría"
