import numpy as np
import pytest

from identity_ner.corpus import SpanDocument
from identity_ner.errors import CorpusFormatError, OverlapError
from identity_ner.evaluation import (
    ClassCounts,
    MatchCounts,
    TYPED_CLASSES,
    compute_report,
    evaluate_predictions,
    format_report,
    match_spans,
    report_tsv,
)
from identity_ner.text import CategoryLabel, Span

from oracles import brute_match_counts

R, E, S, G = (
    CategoryLabel.RELIGION,
    CategoryLabel.ETHNICITY,
    CategoryLabel.SEXUAL_ORIENTATION,
    CategoryLabel.GENDER,
)


class TestMatchSpans:
    def test_perfect_prediction(self):
        gold = [Span(0, 5, R), Span(8, 20, E), Span(22, 30, G)]
        counts = match_spans(gold, list(gold))
        for cls, expected in ((R, 1), (E, 1), (G, 1), (S, 0)):
            c = counts.per_class[cls]
            assert (c.tp, c.fp, c.fn) == (expected, 0, 0)

    def test_wrong_boundary_is_fp_plus_fn(self):
        gold = [Span(8, 20, E)]
        pred = [Span(8, 13, E)]
        c = match_spans(gold, pred).per_class[E]
        assert (c.tp, c.fp, c.fn) == (0, 1, 1)

    def test_wrong_label_splits_between_classes(self):
        counts = match_spans([Span(8, 20, E)], [Span(8, 20, G)])
        assert counts.per_class[G].fp == 1
        assert counts.per_class[E].fn == 1
        assert counts.per_class[G].fn == 0
        assert counts.per_class[E].fp == 0

    def test_tp_fn_sums_to_gold_count(self):
        gold = [Span(0, 3, R), Span(5, 9, R), Span(11, 15, G)]
        pred = [Span(0, 3, R), Span(5, 8, R)]
        counts = match_spans(gold, pred)
        for cls in (R, G):
            c = counts.per_class[cls]
            gold_count = sum(1 for s in gold if s.label == cls)
            pred_count = sum(1 for s in pred if s.label == cls)
            assert c.tp + c.fn == gold_count
            assert c.tp + c.fp == pred_count

    def test_overlap_rejected(self):
        with pytest.raises(OverlapError):
            match_spans([Span(0, 5, R), Span(3, 8, R)], [])

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(17)
        labels = list(CategoryLabel) + [None]
        for _ in range(200):
            def random_spans():
                spans, cursor = [], 0
                for _ in range(rng.integers(0, 6)):
                    start = cursor + rng.integers(0, 4)
                    end = start + rng.integers(1, 5)
                    spans.append(Span(int(start), int(end), labels[rng.integers(5)]))
                    cursor = end
                return spans

            gold, pred = random_spans(), random_spans()
            counts = match_spans(gold, pred)
            brute = brute_match_counts(gold, pred)
            for cls in counts.classes:
                c = counts.per_class[cls]
                tp, fp, fn = brute.get(cls, [0, 0, 0])
                assert (c.tp, c.fp, c.fn) == (tp, fp, fn)

    def test_swapping_gold_and_pred_swaps_precision_recall(self):
        gold = [Span(0, 4, R), Span(6, 9, G)]
        pred = [Span(0, 4, R), Span(6, 9, E), Span(11, 14, G)]
        fwd = compute_report(match_spans(gold, pred))
        rev = compute_report(match_spans(pred, gold))
        assert fwd.micro.precision == pytest.approx(rev.micro.recall)
        assert fwd.micro.recall == pytest.approx(rev.micro.precision)
        for cls in TYPED_CLASSES:
            assert fwd.per_class[cls].precision == pytest.approx(
                rev.per_class[cls].recall
            )


def counts_from(pairs) -> MatchCounts:
    counts = MatchCounts(TYPED_CLASSES)
    for cls, (tp, fp, fn) in pairs.items():
        counts.per_class[cls] = ClassCounts(tp, fp, fn)
    return counts


class TestComputeReport:
    def test_all_zero_counts(self):
        report = compute_report(MatchCounts(TYPED_CLASSES))
        assert report.micro.f1 == 0.0
        assert report.macro.f1 == 0.0
        assert report.weighted.f1 == 0.0
        assert report.degenerate

    def test_hand_computed_class(self):
        report = compute_report(counts_from({R: (3, 1, 1)}))
        m = report.per_class[R]
        assert (m.precision, m.recall, m.f1) == (0.75, 0.75, 0.75)
        assert m.support == 4

    def test_micro_f1_is_harmonic_mean_identity(self):
        report = compute_report(counts_from({R: (3, 1, 2), G: (1, 4, 0)}))
        p, r = report.micro.precision, report.micro.recall
        assert report.micro.f1 == pytest.approx(2 * p * r / (p + r), abs=0)

    def test_weighted_definition(self):
        report = compute_report(counts_from({R: (2, 2, 2), G: (8, 0, 0)}))
        per = report.per_class
        expected = (
            per[R].f1 * per[R].support + per[G].f1 * per[G].support
        ) / (per[R].support + per[G].support)
        assert report.weighted.f1 == pytest.approx(expected)

    def test_macro_invariant_to_support_weighted_is_not(self):
        base = compute_report(counts_from({R: (2, 2, 2), G: (8, 0, 0)}))
        scaled = compute_report(counts_from({R: (8, 8, 8), G: (8, 0, 0)}))
        assert base.macro.f1 == pytest.approx(scaled.macro.f1)
        # growing the worst class's support drags the weighted average down
        assert scaled.weighted.f1 < base.weighted.f1


class TestFormatting:
    def test_layout_rows_in_order(self):
        text = format_report(compute_report(counts_from({R: (3, 1, 1)})))
        lines = text.splitlines()
        names = [line.split("  ")[0] for line in lines]
        order = ["Religion", "Ethnicity", "Sexual Orientation", "Gender",
                 "Micro Avg", "Macro Avg", "Weighted Avg"]
        positions = [names.index(n) for n in order]
        assert positions == sorted(positions)
        assert "Support" in lines[1]

    def test_degenerate_footnote(self):
        text = format_report(compute_report(MatchCounts(TYPED_CLASSES)))
        assert "0/0" in text

    def test_tsv_has_all_rows(self):
        tsv = report_tsv(compute_report(counts_from({R: (3, 1, 1)})))
        assert len(tsv.strip().splitlines()) == 1 + 4 + 3


class TestEvaluatePredictions:
    def make_gold(self):
        return [
            SpanDocument("d1", "inflame black people", (Span(8, 20, E),)),
            SpanDocument("d2", "mock women daily", (Span(5, 10, G),)),
        ]

    def test_gold_as_prediction_scores_one_everywhere(self):
        gold = self.make_gold()
        report, _ = evaluate_predictions(
            gold, {d.id: list(d.spans) for d in gold}
        )
        assert report.micro.f1 == 1.0
        assert report.weighted.f1 == 1.0
        for cls in (E, G):
            assert report.per_class[cls].f1 == 1.0

    def test_empty_corpus_all_zero(self):
        report, _ = evaluate_predictions([], {})
        assert report.micro.f1 == 0.0
        assert report.total_support == 0

    def test_missing_prediction_counts_as_misses(self):
        gold = self.make_gold()
        report, counts = evaluate_predictions(gold, {"d1": list(gold[0].spans)})
        assert counts.per_class[G].fn == 1
        assert report.per_class[E].f1 == 1.0

    def test_unknown_prediction_id_rejected(self):
        with pytest.raises(CorpusFormatError):
            evaluate_predictions(self.make_gold(), {"nope": []})

    def test_untyped_projection(self):
        gold = self.make_gold()
        pred = {
            "d1": [Span(8, 20, G)],  # wrong label, right boundaries
            "d2": [Span(5, 10, G)],
        }
        typed_report, _ = evaluate_predictions(gold, pred, typed=True)
        untyped_report, _ = evaluate_predictions(gold, pred, typed=False)
        assert typed_report.micro.f1 < 1.0
        assert untyped_report.micro.f1 == 1.0
