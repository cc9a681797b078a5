"""Entity-level evaluation: exact-match typed spans.

A prediction counts as a true positive only when a gold span with the
identical (start, end, label) triple exists.  That is the strictest
matching convention; it is stated in the report header so numbers are
never silently partial-credit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import crf
from .corpus import SpanDocument
from .errors import CorpusFormatError
from .text import CategoryLabel, Span, check_non_overlapping, decode_bio, tokenize

ClassKey = Optional[CategoryLabel]


def class_display(cls: ClassKey) -> str:
    return cls.display if cls else "Mention"


@dataclass(frozen=True)
class ClassCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def add(self, tp: int = 0, fp: int = 0, fn: int = 0) -> "ClassCounts":
        return ClassCounts(self.tp + tp, self.fp + fp, self.fn + fn)


@dataclass
class MatchCounts:
    classes: tuple[ClassKey, ...]
    per_class: dict[ClassKey, ClassCounts] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for cls in self.classes:
            self.per_class.setdefault(cls, ClassCounts())

    def merge(self, other: "MatchCounts") -> "MatchCounts":
        merged = MatchCounts(self.classes)
        for cls in self.classes:
            a, b = self.per_class[cls], other.per_class[cls]
            merged.per_class[cls] = ClassCounts(a.tp + b.tp, a.fp + b.fp, a.fn + b.fn)
        return merged

    def pooled(self) -> ClassCounts:
        return ClassCounts(
            sum(c.tp for c in self.per_class.values()),
            sum(c.fp for c in self.per_class.values()),
            sum(c.fn for c in self.per_class.values()),
        )


TYPED_CLASSES: tuple[ClassKey, ...] = tuple(CategoryLabel)
UNTYPED_CLASSES: tuple[ClassKey, ...] = (None,)


def match_spans(
    gold: Sequence[Span],
    pred: Sequence[Span],
    classes: Optional[Sequence[ClassKey]] = None,
) -> MatchCounts:
    """Exact-match counting: TP iff (start, end, label) coincide."""
    check_non_overlapping(gold)
    check_non_overlapping(pred)
    if classes is None:
        classes = TYPED_CLASSES
    observed = [s.label for s in list(gold) + list(pred)]
    class_list = list(classes) + [c for c in dict.fromkeys(observed) if c not in classes]
    counts = MatchCounts(tuple(class_list))

    gold_keys = {(s.start, s.end, s.label) for s in gold}
    pred_keys = {(s.start, s.end, s.label) for s in pred}
    for s in pred:
        key = "tp" if (s.start, s.end, s.label) in gold_keys else "fp"
        counts.per_class[s.label] = counts.per_class[s.label].add(**{key: 1})
    for s in gold:
        if (s.start, s.end, s.label) not in pred_keys:
            counts.per_class[s.label] = counts.per_class[s.label].add(fn=1)
    return counts


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ClassMetrics(Metrics):
    support: int


@dataclass
class EvalReport:
    classes: tuple[ClassKey, ...]
    per_class: dict[ClassKey, ClassMetrics]
    micro: Metrics
    macro: Metrics
    weighted: Metrics
    total_support: int
    degenerate: bool  # some 0/0 ratio was reported as 0

    def to_json(self, counts: Optional[MatchCounts] = None) -> dict:
        def m(x: Metrics) -> dict:
            return {"precision": x.precision, "recall": x.recall, "f1": x.f1}

        obj: dict = {
            "matching": "exact span boundaries and label",
            "classes": {
                class_display(c): {**m(v), "support": v.support}
                for c, v in self.per_class.items()
            },
            "micro": m(self.micro),
            "macro": m(self.macro),
            "weighted": m(self.weighted),
            "total_support": self.total_support,
            "zero_over_zero_reported_as_zero": self.degenerate,
        }
        if counts is not None:
            obj["counts"] = {
                class_display(c): {"tp": v.tp, "fp": v.fp, "fn": v.fn}
                for c, v in counts.per_class.items()
            }
        return obj


def _prf(c: ClassCounts) -> tuple[Metrics, bool]:
    degenerate = c.tp + c.fp == 0 or c.tp + c.fn == 0
    p = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    r = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    if p + r == 0.0:
        f, degenerate = 0.0, True
    else:
        f = 2 * p * r / (p + r)
    return Metrics(p, r, f), degenerate


def compute_report(counts: MatchCounts) -> EvalReport:
    """Per-class P/R/F1 with support plus micro/macro/weighted aggregates.

    0/0 ratios are 0 by convention and flagged in the report.  Classes with
    no data at all (no gold and no predictions) keep their zero row in the
    layout but are left out of macro/weighted averaging: averaging in a
    vacuous class would fabricate a penalty.
    """
    per_class: dict[ClassKey, ClassMetrics] = {}
    degenerate = False
    active: list[ClassKey] = []
    for cls in counts.classes:
        c = counts.per_class[cls]
        if c.tp + c.fp + c.fn > 0:
            active.append(cls)
            metrics, bad = _prf(c)
            degenerate = degenerate or bad
        else:
            metrics = Metrics(0.0, 0.0, 0.0)
        per_class[cls] = ClassMetrics(
            metrics.precision, metrics.recall, metrics.f1, support=c.tp + c.fn
        )

    micro, bad = _prf(counts.pooled())
    degenerate = degenerate or bad

    if active:
        k = len(active)
        macro = Metrics(
            sum(per_class[c].precision for c in active) / k,
            sum(per_class[c].recall for c in active) / k,
            sum(per_class[c].f1 for c in active) / k,
        )
    else:
        macro = Metrics(0.0, 0.0, 0.0)
    total_support = sum(m.support for m in per_class.values())
    if total_support:
        weighted = Metrics(
            sum(m.precision * m.support for m in per_class.values()) / total_support,
            sum(m.recall * m.support for m in per_class.values()) / total_support,
            sum(m.f1 * m.support for m in per_class.values()) / total_support,
        )
    else:
        weighted = Metrics(0.0, 0.0, 0.0)
    return EvalReport(
        counts.classes, per_class, micro, macro, weighted, total_support, degenerate
    )


def format_report(report: EvalReport) -> str:
    """Aligned text table: one row per class, then the three aggregates."""
    rows = [("Entity Group", "Precision", "Recall", "F1-Score", "Support")]
    for cls in report.classes:
        m = report.per_class[cls]
        rows.append(
            (class_display(cls), f"{m.precision:.2f}", f"{m.recall:.2f}",
             f"{m.f1:.2f}", str(m.support))
        )
    divider_after = {0, len(rows) - 1}
    for name, m in (("Micro Avg", report.micro), ("Macro Avg", report.macro),
                    ("Weighted Avg", report.weighted)):
        rows.append(
            (name, f"{m.precision:.2f}", f"{m.recall:.2f}", f"{m.f1:.2f}",
             str(report.total_support))
        )
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    lines = ["Matching: exact span boundaries and label"]
    for i, row in enumerate(rows):
        lines.append(
            "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        )
        if i in divider_after:
            lines.append("-" * (sum(widths) + 2 * 4))
    if report.degenerate:
        lines.append("Note: 0/0 ratios are reported as 0.")
    return "\n".join(lines) + "\n"


def report_tsv(report: EvalReport) -> str:
    """Delimited form of the same table."""
    lines = ["class\tprecision\trecall\tf1\tsupport"]
    for cls in report.classes:
        m = report.per_class[cls]
        lines.append(
            f"{class_display(cls)}\t{m.precision:.6f}\t{m.recall:.6f}"
            f"\t{m.f1:.6f}\t{m.support}"
        )
    for name, m in (("micro", report.micro), ("macro", report.macro),
                    ("weighted", report.weighted)):
        lines.append(
            f"{name}\t{m.precision:.6f}\t{m.recall:.6f}\t{m.f1:.6f}"
            f"\t{report.total_support}"
        )
    return "\n".join(lines) + "\n"


def tag_document(model: crf.CrfModel, text: str) -> list[Span]:
    """Viterbi-tag a text and decode the resulting spans."""
    doc = tokenize(text)
    if len(doc) == 0:
        return []
    tags, _ = crf.viterbi(model, doc)
    return decode_bio(doc, tags)


def evaluate_corpus(
    gold: Sequence[SpanDocument],
    model: crf.CrfModel,
    typed: bool = True,
) -> tuple[EvalReport, MatchCounts]:
    """Tag every document, match against gold, and aggregate the counts."""
    predictions = {doc.id: tag_document(model, doc.text) for doc in gold}
    return evaluate_predictions(gold, predictions, typed=typed)


def evaluate_predictions(
    gold: Sequence[SpanDocument],
    predictions: dict[str, Sequence[Span]],
    typed: bool = True,
) -> tuple[EvalReport, MatchCounts]:
    unknown = set(predictions) - {doc.id for doc in gold}
    if unknown:
        raise CorpusFormatError(
            f"predictions reference unknown document ids: {sorted(unknown)[:5]}"
        )
    classes = TYPED_CLASSES if typed else UNTYPED_CLASSES

    def project(spans: Sequence[Span]) -> list[Span]:
        if typed:
            return list(spans)
        return [Span(s.start, s.end, None) for s in spans]

    counts = MatchCounts(classes)
    for doc in gold:
        pred = predictions.get(doc.id, [])
        counts = counts.merge(
            match_spans(project(doc.spans), project(pred), classes=classes)
        )
    return compute_report(counts), counts
