"""Document pipeline: extraction, resolution, training-example assembly, and
event location."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import make_entry
from placelink.corpus import Annotation, CorpusDocument
from placelink.features import hashed_bow_provider
from placelink.index import IndexConfig, build_index
from placelink.pipeline import (
    DictionaryExtractor,
    Document,
    EventLocationResult,
    ResolutionRecord,
    Span,
    TriggerProximityLocator,
    assemble_examples,
    dictionary_extract,
    locate_event,
    record_from_dict,
    record_to_dict,
    resolve_annotated_document,
    resolve_corpus,
    resolve_document,
)
from placelink.ranker import ModelDimensionError, RankerConfig, RankerModel, train
from placelink.synthgen import augment_impossible, generate_corpus

PROVIDER_DIM = 64


@pytest.fixture(scope="module")
def mini_world(mini_entries, mini_index, mini_tables):
    """A small trained model over the mini gazetteer."""
    provider = hashed_bow_provider(PROVIDER_DIM, seed=0)
    docs = augment_impossible(generate_corpus(mini_entries, mini_tables, n=120, seed=3), 0.1, seed=4)
    examples = assemble_examples(docs, mini_index, provider, mini_tables)
    cfg = RankerConfig(epochs=8, embedding_dim=16, hidden_dim=32, seed=0)
    model = RankerModel.initialize(
        [e.country_code for e in mini_entries],
        [e.feature_class for e in mini_entries],
        PROVIDER_DIM,
        cfg,
    )
    train(model, examples)
    return model, provider


def rec(start=0, end=5, gid=1, doc_id="d", **overrides) -> ResolutionRecord:
    fields = dict(
        doc_id=doc_id,
        start=start,
        end=end,
        query_text="x",
        predicted_geoname_id=gid,
        predicted_lat=0.0 if gid is not None else None,
        predicted_lon=0.0 if gid is not None else None,
        predicted_country="FR" if gid is not None else "",
        predicted_admin1="",
        predicted_feature_class="P" if gid is not None else "",
        score=0.9,
        candidate_count=3,
    )
    fields.update(overrides)
    return ResolutionRecord(**fields)


class TestDocument:
    def test_valid_document(self):
        doc = Document("d", "Paris and Austin", [Span(0, 5, "Paris"), Span(10, 16, "Austin")])
        assert len(doc.toponym_spans) == 2

    def test_out_of_bounds_span(self):
        with pytest.raises(ValueError):
            Document("d", "short", [Span(0, 99, "x")])

    def test_inverted_span(self):
        with pytest.raises(ValueError):
            Document("d", "short", [Span(3, 3, "")])

    def test_overlapping_spans(self):
        with pytest.raises(ValueError):
            Document("d", "Paris Texas", [Span(0, 8, "Paris Te"), Span(6, 11, "Texas")])


class TestDictionaryExtract:
    def test_single_hit(self, mini_index):
        spans = dictionary_extract("Protests in Paris yesterday", mini_index)
        assert spans == [Span(12, 17, "Paris")]

    def test_lowercase_not_matched(self, mini_index):
        assert dictionary_extract("protests in paris yesterday", mini_index) == []

    def test_longest_match_wins(self):
        index = build_index([
            make_entry(1, "New York"),
            make_entry(2, "New York City"),
            make_entry(3, "York"),
        ])
        spans = dictionary_extract("He left New York City on Monday", index)
        assert spans == [Span(8, 21, "New York City")]

    def test_multiple_hits_in_order(self, mini_index):
        spans = dictionary_extract("From Paris to Austin", mini_index)
        assert [s.surface for s in spans] == ["Paris", "Austin"]

    def test_surfaces_match_text_slices(self, mini_index):
        text = "Meanwhile Texas, France and Springfield reacted."
        for span in dictionary_extract(text, mini_index):
            assert text[span.start : span.end] == span.surface

    def test_short_tokens_skipped(self):
        index = build_index([make_entry(1, "A")])
        assert dictionary_extract("A big day", index, min_token_len=2) == []

    def test_extractor_class_matches_function(self, mini_index):
        text = "Back in Paris again"
        assert DictionaryExtractor(mini_index).extract(text) == dictionary_extract(text, mini_index)

    def test_multi_word_name(self, mini_index):
        spans = dictionary_extract("The United States responded", mini_index)
        assert spans == [Span(4, 17, "United States")]


class TestResolveDocument:
    def test_no_spans_no_records(self, mini_index, mini_tables, mini_world):
        model, provider = mini_world
        doc = Document("d", "Nothing to see here.")
        assert resolve_document(doc, mini_index, model, provider, mini_tables) == []

    def test_zero_candidate_span_abstains(self, mini_index, mini_tables, mini_world):
        model, provider = mini_world
        doc = Document("d", "Welcome to Zzzzz today", [Span(11, 16, "Zzzzz")])
        (record,) = resolve_document(doc, mini_index, model, provider, mini_tables)
        assert record.abstained
        assert record.candidate_count == 0
        assert record.predicted_geoname_id is None
        assert record.predicted_lat is None
        assert record.score == 1.0

    def test_one_record_per_span_in_order(self, mini_index, mini_tables, mini_world):
        model, provider = mini_world
        text = "From Paris to Austin and beyond"
        doc = Document("d", text, [Span(5, 10, "Paris"), Span(14, 20, "Austin")])
        records = resolve_document(doc, mini_index, model, provider, mini_tables)
        assert [(r.start, r.end) for r in records] == [(5, 10), (14, 20)]
        assert all(r.doc_id == "d" for r in records)

    def test_predicted_fields_present_iff_resolved(self, mini_index, mini_tables, mini_world):
        model, provider = mini_world
        doc = Document("d", "Paris and Zzzzz", [Span(0, 5, "Paris"), Span(10, 15, "Zzzzz")])
        for record in resolve_document(doc, mini_index, model, provider, mini_tables):
            if record.abstained:
                assert record.predicted_lat is None and record.predicted_lon is None
            else:
                assert record.predicted_lat is not None and record.predicted_lon is not None
            assert 0.0 <= record.score <= 1.0

    def test_inference_is_deterministic(self, mini_index, mini_tables, mini_world):
        model, provider = mini_world
        doc = Document("d", "Paris met Texas", [Span(0, 5, "Paris"), Span(10, 15, "Texas")])
        a = resolve_document(doc, mini_index, model, provider, mini_tables)
        b = resolve_document(doc, mini_index, model, provider, mini_tables)
        assert [record_to_dict(r) for r in a] == [record_to_dict(r) for r in b]

    def test_span_order_permutes_records_not_predictions(self, mini_index, mini_tables, mini_world):
        model, provider = mini_world
        text = "Paris met Texas"
        spans = [Span(0, 5, "Paris"), Span(10, 15, "Texas")]
        fwd = resolve_document(Document("d", text, spans), mini_index, model, provider, mini_tables)
        rev = resolve_document(
            Document("d", text, spans[::-1]), mini_index, model, provider, mini_tables
        )
        by_start_fwd = {r.start: (r.predicted_geoname_id, r.score) for r in fwd}
        by_start_rev = {r.start: (r.predicted_geoname_id, r.score) for r in rev}
        assert by_start_fwd == by_start_rev
        assert [r.start for r in rev] == [10, 0]

    def test_dimension_mismatch_rejected(self, mini_index, mini_tables, mini_world):
        model, _ = mini_world
        other = hashed_bow_provider(PROVIDER_DIM * 2, seed=0)
        doc = Document("d", "Paris", [Span(0, 5, "Paris")])
        with pytest.raises(ModelDimensionError):
            resolve_document(doc, mini_index, model, other, mini_tables)

    def test_small_window_still_resolves(self, mini_index, mini_tables, mini_world):
        model, provider = mini_world
        filler = "The talks continued for days. " * 20
        text = filler + "Paris hosted them."
        start = len(filler)
        doc = Document("d", text, [Span(start, start + 5, "Paris")])
        (record,) = resolve_document(
            doc, mini_index, model, provider, mini_tables, window_chars=60
        )
        assert record.candidate_count > 0

    def test_trained_model_uses_context(self, mini_index, mini_tables, mini_world):
        model, provider = mini_world
        text = "Paris, the capital of France"
        doc = Document(
            "d", text, [Span(0, 5, "Paris"), Span(22, 28, "France")]
        )
        records = resolve_document(doc, mini_index, model, provider, mini_tables)
        assert records[0].predicted_geoname_id == 2  # the French Paris
        assert records[1].predicted_geoname_id == 1


class TestResolveAnnotated:
    def make_doc(self, exclude=False):
        return CorpusDocument(
            doc_id="d",
            text="Paris, the capital of France",
            annotations=[
                Annotation(
                    start=0, end=5, surface="Paris", gold_geoname_id=2,
                    gold_lat=48.8566, gold_lon=2.3522, gold_country="FR",
                    gold_admin1="11", gold_feature_class="P", exclude_gold=exclude,
                ),
                Annotation(start=22, end=28, surface="France", gold_geoname_id=1),
            ],
        )

    def test_gold_fields_copied(self, mini_index, mini_tables, mini_world):
        model, provider = mini_world
        records = resolve_annotated_document(
            self.make_doc(), mini_index, model, provider, mini_tables
        )
        assert records[0].gold_geoname_id == 2
        assert records[0].gold_country == "FR"
        assert records[0].gold_admin1 == "11"
        assert records[0].gold_lat == 48.8566
        assert not records[0].impossible
        assert records[0].gold_in_candidates

    def test_exclude_gold_withholds_the_entry(self, mini_index, mini_tables, mini_world):
        model, provider = mini_world
        records = resolve_annotated_document(
            self.make_doc(exclude=True), mini_index, model, provider, mini_tables
        )
        assert records[0].impossible
        assert not records[0].gold_in_candidates
        assert records[0].predicted_geoname_id != 2

    def test_corpus_resolution_preserves_order(self, mini_index, mini_tables, mini_world):
        model, provider = mini_world
        docs = [self.make_doc(), self.make_doc()]
        docs[1].doc_id = "e"
        records = resolve_corpus(docs, mini_index, model, provider, mini_tables)
        assert [r.doc_id for r in records] == ["d", "d", "e", "e"]

    def test_threaded_resolution_matches_sequential(self, mini_index, mini_tables, mini_world):
        model, provider = mini_world
        docs = [self.make_doc() for _ in range(6)]
        for i, doc in enumerate(docs):
            doc.doc_id = f"d{i}"
        seq = resolve_corpus(docs, mini_index, model, provider, mini_tables, jobs=1)
        par = resolve_corpus(docs, mini_index, model, provider, mini_tables, jobs=3)
        assert [record_to_dict(r) for r in seq] == [record_to_dict(r) for r in par]


class TestAssembleExamples:
    def test_gold_slot_points_at_gold_candidate(self, mini_index, mini_tables):
        provider = hashed_bow_provider(PROVIDER_DIM, seed=0)
        doc = CorpusDocument(
            doc_id="d",
            text="Paris in Texas",
            annotations=[Annotation(start=0, end=5, surface="Paris", gold_geoname_id=6)],
        )
        (example,) = assemble_examples([doc], mini_index, provider, mini_tables)
        # candidates for "Paris" are [2, 6, 11]; gold id 6 sits at slot 1
        assert example.gold_slot == 1
        assert example.doc_id == "d"

    def test_unretrievable_gold_becomes_null_slot(self, mini_index, mini_tables):
        provider = hashed_bow_provider(PROVIDER_DIM, seed=0)
        doc = CorpusDocument(
            doc_id="d",
            text="Paris spoke",
            annotations=[Annotation(start=0, end=5, surface="Paris", gold_geoname_id=999)],
        )
        (example,) = assemble_examples([doc], mini_index, provider, mini_tables)
        assert example.gold_slot == len(example.features)

    def test_excluded_gold_becomes_null_slot(self, mini_index, mini_tables):
        provider = hashed_bow_provider(PROVIDER_DIM, seed=0)
        doc = CorpusDocument(
            doc_id="d",
            text="Paris spoke",
            annotations=[
                Annotation(start=0, end=5, surface="Paris", gold_geoname_id=2, exclude_gold=True)
            ],
        )
        (example,) = assemble_examples([doc], mini_index, provider, mini_tables)
        assert example.gold_slot == len(example.features)
        # the withheld entry is really gone from the feature rows
        assert len(example.features) == 2

    def test_zero_candidate_spans_skipped(self, mini_index, mini_tables):
        provider = hashed_bow_provider(PROVIDER_DIM, seed=0)
        doc = CorpusDocument(
            doc_id="d",
            text="Zzzzz said",
            annotations=[Annotation(start=0, end=5, surface="Zzzzz", gold_geoname_id=None)],
        )
        assert assemble_examples([doc], mini_index, provider, mini_tables) == []

    def test_gold_country_copied(self, mini_index, mini_tables):
        provider = hashed_bow_provider(PROVIDER_DIM, seed=0)
        doc = CorpusDocument(
            doc_id="d",
            text="Paris spoke",
            annotations=[
                Annotation(start=0, end=5, surface="Paris", gold_geoname_id=2, gold_country="FR")
            ],
        )
        (example,) = assemble_examples([doc], mini_index, provider, mini_tables)
        assert example.gold_country == "FR"


class TestLocateEvent:
    def doc_with_trigger(self, trigger=(38, 45)):
        text = "x" * 100
        return Document("d", text, [Span(15, 25, "a" * 10), Span(85, 95, "b" * 10)],
                        event_trigger_span=trigger)

    def test_nearest_resolved_span_chosen(self):
        doc = self.doc_with_trigger()  # trigger midpoint 41.5
        records = [rec(start=15, end=25, gid=1), rec(start=85, end=95, gid=2)]
        result = locate_event(doc, records)
        assert result.status == "located"
        assert result.record.predicted_geoname_id == 1

    def test_tie_goes_to_earlier_span(self):
        doc = Document("d", "x" * 100, [Span(10, 20, "a" * 10), Span(40, 50, "b" * 10)],
                       event_trigger_span=(25, 35))  # midpoint 30, both spans 15 away
        records = [rec(start=10, end=20, gid=1), rec(start=40, end=50, gid=2)]
        assert locate_event(doc, records).record.predicted_geoname_id == 1

    def test_abstentions_are_ignored(self):
        doc = self.doc_with_trigger()
        records = [rec(start=15, end=25, gid=None), rec(start=85, end=95, gid=7)]
        assert locate_event(doc, records).record.predicted_geoname_id == 7

    def test_all_abstained_no_location(self):
        doc = self.doc_with_trigger()
        records = [rec(start=15, end=25, gid=None), rec(start=85, end=95, gid=None)]
        assert locate_event(doc, records).status == "no_location"

    def test_no_trigger_not_applicable(self):
        doc = Document("d", "x" * 100, [Span(15, 25, "a" * 10)])
        result = locate_event(doc, [rec(start=15, end=25, gid=1)])
        assert result.status == "not_applicable"
        assert result.record is None

    def test_single_resolved_span_always_wins(self):
        doc = self.doc_with_trigger(trigger=(0, 2))
        records = [rec(start=85, end=95, gid=4)]
        assert locate_event(doc, records).record.predicted_geoname_id == 4

    def test_custom_locator_is_used(self):
        class LastResolved:
            def select(self, doc, records):
                resolved = [r for r in records if not r.abstained]
                return resolved[-1] if resolved else None

        doc = Document("d", "x" * 100, [Span(15, 25, "a" * 10), Span(85, 95, "b" * 10)])
        records = [rec(start=15, end=25, gid=1), rec(start=85, end=95, gid=2)]
        result = locate_event(doc, records, locator=LastResolved())
        assert result.status == "located"
        assert result.record.predicted_geoname_id == 2


class TestRecordSerialization:
    def test_round_trip(self):
        records = [
            rec(),
            rec(gid=None, score=0.4, candidate_count=0),
            rec(gold_geoname_id=9, gold_lat=1.5, gold_lon=-2.5, gold_country="US",
                gold_admin1="TX", gold_feature_class="P", impossible=True,
                gold_in_candidates=True),
        ]
        for record in records:
            assert record_from_dict(record_to_dict(record)) == record
