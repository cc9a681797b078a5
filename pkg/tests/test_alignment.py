import pytest

from identity_ner import classifier as clf
from identity_ner import crf
from identity_ner.alignment import (
    AlignmentConfig,
    LabeledSentence,
    ReviewDecision,
    ReviewItem,
    align_corpus,
    apply_decisions,
    classify_span,
    decision_from_json,
    export_review_queue,
    latest_decisions,
    read_review_queue,
)
from identity_ner.errors import (
    InvalidEditedSpanError,
    MalformedDecisionError,
    ModelAlphabetError,
    SpanOutOfBoundsError,
    UnknownItemError,
)
from identity_ner.features import FeatureConfig
from identity_ner.text import CategoryLabel, Span, TYPED_TAGS, UNTYPED_TAGS

SMALL = FeatureConfig(hash_dimension=2048, window=1)
R, E, S, G = (
    CategoryLabel.RELIGION,
    CategoryLabel.ETHNICITY,
    CategoryLabel.SEXUAL_ORIENTATION,
    CategoryLabel.GENDER,
)


@pytest.fixture(scope="module")
def lexicon_classifier():
    """Toy classifier trained directly on the bundled lexicon words."""
    from identity_ner.lexicon import LEXICON
    from identity_ner.train import TrainConfig

    pairs = [(word, cat) for cat, words in LEXICON.items() for word in words]
    cfg = TrainConfig(epochs=40, learning_rate=0.5, l2=0.0, seed=5, patience=40)
    return clf.train(pairs, cfg, feature_config=SMALL)


class TestClassifySpan:
    def test_lexicon_toy_identifies_religion_word(self, lexicon_classifier):
        text = "they inflame muslim communities online"
        predicted, probability = classify_span(lexicon_classifier, text, Span(13, 19))
        assert predicted is R
        assert probability > 0.5

    def test_zero_weight_classifier_ties_to_first_class(self):
        model = clf.zero_model(feature_config=SMALL)
        predicted, probability = classify_span(model, "some text", Span(0, 4))
        assert predicted is R
        assert probability == pytest.approx(0.2)

    def test_window_clipped_to_text(self, trained_models):
        _, classifier = trained_models
        text = "muslim"
        a = classify_span(classifier, text, Span(0, 6), context_window=1000)
        b = classify_span(classifier, text, Span(0, 6), context_window=0)
        assert a == b  # whole text is the span

    def test_window_changes_input(self, trained_models):
        _, classifier = trained_models
        text = "they inflame muslim communities online"
        no_ctx = classify_span(classifier, text, Span(13, 19), context_window=0)
        with_ctx = classify_span(classifier, text, Span(13, 19), context_window=10)
        assert no_ctx[1] != with_ctx[1]

    def test_out_of_bounds(self):
        model = clf.zero_model(feature_config=SMALL)
        with pytest.raises(SpanOutOfBoundsError):
            classify_span(model, "short", Span(0, 99))


def sentences_fixture():
    return [
        LabeledSentence("s1", "they inflame muslim communities", frozenset({R})),
        LabeledSentence("s2", "attack black people online", frozenset({E})),
        LabeledSentence("s3", "mock women daily", frozenset({G})),
        LabeledSentence("s4", "totally calm words", frozenset({G})),
    ]


class TestAlignCorpus:
    def test_agreement_emits_typed_span(self, trained_models):
        tagger, classifier = trained_models
        examples, stats = align_corpus(sentences_fixture(), tagger, classifier)
        assert stats.sentences_in == 4
        by_id = {e.id: e for e in examples}
        assert "s1" in by_id
        assert all(s.label is R for s in by_id["s1"].spans)

    def test_filter_soundness(self, trained_models):
        tagger, classifier = trained_models
        examples, _ = align_corpus(sentences_fixture(), tagger, classifier)
        for example in examples:
            labels = {
                l
                for p in example.provenance
                for l in p.sentence_labels
            }
            for span in example.spans:
                assert span.label in labels

    def test_disagreement_drops_sentence(self, trained_models):
        tagger, classifier = trained_models
        # gender ground truth, but the only mention is a religion word
        sentences = [
            LabeledSentence("x1", "they inflame muslim communities", frozenset({G}))
        ]
        examples, stats = align_corpus(sentences, tagger, classifier)
        assert examples == []
        assert stats.spans_rejected_disagreement == stats.spans_tagged > 0
        assert stats.sentences_emitted == 0

    def test_no_spans_means_no_output(self, trained_models):
        # a zero tagger ties every path to all-O: guaranteed zero spans
        _, classifier = trained_models
        zero_tagger = crf.zero_model(UNTYPED_TAGS, SMALL)
        sentences = [LabeledSentence("q1", "totally calm words", frozenset({G}))]
        examples, stats = align_corpus(sentences, zero_tagger, classifier)
        assert examples == []
        assert stats.sentences_in == 1
        assert stats.spans_tagged == 0

    def test_stats_conservation(self, trained_models):
        tagger, classifier = trained_models
        _, stats = align_corpus(sentences_fixture(), tagger, classifier)
        assert stats.spans_accepted + stats.spans_rejected_disagreement == (
            stats.spans_tagged
        )
        assert sum(stats.spans_classified_per_class.values()) == stats.spans_tagged
        assert stats.sentences_emitted <= stats.sentences_in

    def test_monotonic_per_sentence_independence(self, trained_models):
        tagger, classifier = trained_models
        sentences = sentences_fixture()
        full, _ = align_corpus(sentences, tagger, classifier)
        reduced, _ = align_corpus(sentences[1:], tagger, classifier)
        full_rest = [e for e in full if e.id != "s1"]
        assert [(e.id, e.spans) for e in full_rest] == [
            (e.id, e.spans) for e in reduced
        ]

    def test_probability_threshold_rejects(self, trained_models):
        tagger, classifier = trained_models
        strict = AlignmentConfig(probability_threshold=1.1)  # nothing passes
        examples, stats = align_corpus(
            sentences_fixture(), tagger, classifier, strict
        )
        assert examples == []
        assert stats.spans_accepted == 0

    def test_typed_tagger_rejected(self, trained_models):
        _, classifier = trained_models
        typed = crf.zero_model(TYPED_TAGS, SMALL)
        with pytest.raises(ModelAlphabetError):
            align_corpus(sentences_fixture(), typed, classifier)

    def test_wrong_classifier_alphabet_rejected(self, trained_models):
        tagger, _ = trained_models
        three_way = clf.zero_model(classes=(R, E, None), feature_config=SMALL)
        with pytest.raises(ModelAlphabetError):
            align_corpus(sentences_fixture(), tagger, three_way)


def make_queue(trained_models):
    tagger, classifier = trained_models
    examples, _ = align_corpus(sentences_fixture(), tagger, classifier)
    return examples


def decision(item_id, action, stamp="2026-01-05T10:00:00Z", spans=None, reviewer="rev"):
    return ReviewDecision(item_id, action, reviewer, stamp, spans)


class TestReviewQueue:
    def test_export_is_deterministic(self, trained_models, tmp_path):
        examples = make_queue(trained_models)
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert export_review_queue(examples, a) == len(examples)
        export_review_queue(examples, b)
        assert a.read_bytes() == b.read_bytes()

    def test_empty_export(self, tmp_path):
        path = tmp_path / "queue.jsonl"
        assert export_review_queue([], path) == 0
        assert path.read_bytes() == b""

    def test_roundtrip_preserves_items(self, trained_models, tmp_path):
        examples = make_queue(trained_models)
        path = tmp_path / "queue.jsonl"
        export_review_queue(examples, path)
        items = read_review_queue(path)
        assert [i.example.id for i in items] == sorted(e.id for e in examples)
        assert all(i.status == "pending" for i in items)
        by_id = {e.id: e for e in examples}
        for item in items:
            assert item.example.spans == by_id[item.example.id].spans
            assert item.example.provenance == by_id[item.example.id].provenance


class TestApplyDecisions:
    def queue(self, trained_models):
        return [ReviewItem(e) for e in make_queue(trained_models)]

    def test_accept_all_is_identity(self, trained_models):
        queue = self.queue(trained_models)
        decisions = [decision(i.example.id, "accept") for i in queue]
        corpus = apply_decisions(queue, decisions)
        assert [(d.id, d.spans) for d in corpus] == [
            (i.example.id, i.example.spans) for i in queue
        ]

    def test_reject_all_is_empty(self, trained_models):
        queue = self.queue(trained_models)
        decisions = [decision(i.example.id, "reject") for i in queue]
        assert apply_decisions(queue, decisions) == []

    def test_undecided_items_are_dropped(self, trained_models):
        queue = self.queue(trained_models)
        decisions = [decision(queue[0].example.id, "accept")]
        corpus = apply_decisions(queue, decisions)
        assert [d.id for d in corpus] == [queue[0].example.id]

    def test_edit_tightens_boundary(self):
        from identity_ner.alignment import AlignedExample

        example = AlignedExample(
            "b1", "inflame black people", (Span(8, 20, E),), ()
        )
        queue = [ReviewItem(example)]
        edited = (Span(8, 13, E),)
        corpus = apply_decisions(
            queue, [decision("b1", "edit", spans=edited)]
        )
        assert corpus[0].spans == edited
        assert corpus[0].text == "inflame black people"

    def test_latest_timestamp_wins(self, trained_models):
        queue = self.queue(trained_models)
        item_id = queue[0].example.id
        decisions = [
            decision(item_id, "accept", "2026-01-05T10:00:00Z"),
            decision(item_id, "reject", "2026-01-06T10:00:00Z"),
        ]
        assert apply_decisions(queue[:1], decisions) == []
        # same timestamps: file order breaks the tie
        decisions = [
            decision(item_id, "reject", "2026-01-05T10:00:00Z"),
            decision(item_id, "accept", "2026-01-05T10:00:00Z"),
        ]
        assert len(apply_decisions(queue[:1], decisions)) == 1

    def test_idempotent_replay(self, trained_models):
        queue = self.queue(trained_models)
        decisions = [decision(i.example.id, "accept") for i in queue]
        once = apply_decisions(queue, decisions)
        twice = apply_decisions(queue, decisions + decisions)
        assert once == twice

    def test_unknown_item(self, trained_models):
        queue = self.queue(trained_models)
        with pytest.raises(UnknownItemError):
            apply_decisions(queue, [decision("ghost", "accept")])

    def test_invalid_edited_span(self):
        from identity_ner.alignment import AlignedExample

        queue = [ReviewItem(AlignedExample("b1", "short", (Span(0, 5, E),), ()))]
        with pytest.raises(InvalidEditedSpanError):
            apply_decisions(
                queue, [decision("b1", "edit", spans=(Span(0, 50, E),))]
            )


class TestDecisionParsing:
    def test_edit_requires_edited_spans(self):
        with pytest.raises(MalformedDecisionError):
            decision_from_json(
                {"item_id": "a", "action": "edit", "reviewer": "r",
                 "timestamp": "2026-01-05T10:00:00Z"}
            )

    def test_edited_spans_only_with_edit(self):
        with pytest.raises(MalformedDecisionError):
            decision_from_json(
                {"item_id": "a", "action": "accept", "reviewer": "r",
                 "timestamp": "2026-01-05T10:00:00Z", "edited_spans": []}
            )

    def test_unknown_action(self):
        with pytest.raises(MalformedDecisionError):
            decision_from_json(
                {"item_id": "a", "action": "maybe", "reviewer": "r",
                 "timestamp": "2026-01-05T10:00:00Z"}
            )

    def test_bad_timestamp(self):
        with pytest.raises(MalformedDecisionError):
            decision_from_json(
                {"item_id": "a", "action": "accept", "reviewer": "r",
                 "timestamp": "not a time"}
            )

    def test_latest_decision_indexing(self):
        decisions = [
            decision("a", "accept", "2026-01-05T10:00:00Z"),
            decision("a", "reject", "2026-01-07T10:00:00Z"),
            decision("b", "accept", "2026-01-06T10:00:00Z"),
        ]
        latest = latest_decisions(decisions)
        assert latest["a"].action == "reject"
        assert latest["b"].action == "accept"
