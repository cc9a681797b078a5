"""Corpus alignment: turn sentence-labeled toxicity data into typed spans.

The filter is agreement: run the untyped mention tagger over each sentence,
classify every extracted span, and keep a span only when the classifier's
predicted category is one of the sentence's ground-truth labels.  Sentences
with at least one surviving span are emitted as candidates for the manual
review phase; review is mandatory before the corpus may train the final
tagger (the --auto-accept path exists for synthetic CI data only).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import classifier as clf
from . import crf
from .classifier import ClassifierModel, CLASSIFIER_CLASSES, class_wire, class_from_wire
from .corpus import (
    SpanDocument,
    dumps_record,
    iter_jsonl,
    parse_label_list,
    span_from_json,
    span_to_json,
    write_jsonl,
)
from .errors import (
    CorpusFormatError,
    InvalidEditedSpanError,
    MalformedDecisionError,
    ModelAlphabetError,
    OverlapError,
    SpanOutOfBoundsError,
    UnknownItemError,
)
from .features import text_features
from .text import CategoryLabel, Span, UNTYPED_TAGS, check_non_overlapping, decode_bio, tokenize


@dataclass(frozen=True)
class LabeledSentence:
    id: str
    text: str
    labels: frozenset[CategoryLabel]


@dataclass(frozen=True)
class SpanProvenance:
    """How one accepted span came to be: what the tagger found, what the
    classifier said, and what the sentence-level ground truth was."""

    start: int
    end: int
    predicted: Optional[CategoryLabel]
    probability: float
    sentence_labels: frozenset[CategoryLabel]

    def to_json(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "predicted": class_wire(self.predicted),
            "probability": self.probability,
            "sentence_labels": sorted(l.wire for l in self.sentence_labels),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SpanProvenance":
        return cls(
            int(obj["start"]),
            int(obj["end"]),
            class_from_wire(obj["predicted"]),
            float(obj["probability"]),
            parse_label_list(obj["sentence_labels"], "provenance"),
        )


@dataclass(frozen=True)
class AlignedExample:
    id: str
    text: str
    spans: tuple[Span, ...]
    provenance: tuple[SpanProvenance, ...]

    def __post_init__(self) -> None:
        check_non_overlapping(self.spans)


@dataclass
class AlignmentStats:
    sentences_in: int = 0
    spans_tagged: int = 0
    spans_classified_per_class: dict[str, int] = field(default_factory=dict)
    spans_accepted: int = 0
    spans_rejected_disagreement: int = 0
    sentences_emitted: int = 0

    def to_json(self) -> dict:
        return {
            "sentences_in": self.sentences_in,
            "spans_tagged": self.spans_tagged,
            "spans_classified_per_class": dict(
                sorted(self.spans_classified_per_class.items())
            ),
            "spans_accepted": self.spans_accepted,
            "spans_rejected_disagreement": self.spans_rejected_disagreement,
            "sentences_emitted": self.sentences_emitted,
        }


@dataclass(frozen=True)
class AlignmentConfig:
    context_window: int = 0
    probability_threshold: float = 0.0


def classify_span(
    model: ClassifierModel,
    text: str,
    span: Span,
    context_window: int = 0,
) -> tuple[clf.ClassLabel, float]:
    """Classify a span's surface (plus optional context on both sides,
    clipped to the text); returns the argmax class and its probability."""
    if span.end > len(text):
        raise SpanOutOfBoundsError(f"span {span} outside text of length {len(text)}")
    lo = max(0, span.start - context_window)
    hi = min(len(text), span.end + context_window)
    probs = clf.predict(model, text_features(text[lo:hi], model.feature_config))
    best = int(np.argmax(probs))
    return model.classes[best], float(probs[best])


def _check_models(tagger: crf.CrfModel, classifier: ClassifierModel) -> None:
    if set(tagger.tag_set) != set(UNTYPED_TAGS):
        raise ModelAlphabetError(
            "alignment needs an untyped tagger (tags O/B-UNTYPED/I-UNTYPED); "
            f"got {list(tagger.tag_set)}"
        )
    if set(classifier.classes) != set(CLASSIFIER_CLASSES):
        raise ModelAlphabetError(
            "alignment needs the 5-class identity classifier (4 categories + none)"
        )


def align_corpus(
    sentences: Sequence[LabeledSentence],
    tagger: crf.CrfModel,
    classifier: ClassifierModel,
    cfg: AlignmentConfig = AlignmentConfig(),
) -> tuple[list[AlignedExample], AlignmentStats]:
    """Run the agreement filter over a sentence corpus.

    Per-sentence work is independent; output order follows input order.
    """
    _check_models(tagger, classifier)
    stats = AlignmentStats()
    examples: list[AlignedExample] = []
    for sentence in sentences:
        stats.sentences_in += 1
        doc = tokenize(sentence.text)
        if len(doc) == 0:
            continue
        tags, _ = crf.viterbi(tagger, doc)
        found = decode_bio(doc, tags)
        stats.spans_tagged += len(found)

        accepted: list[Span] = []
        provenance: list[SpanProvenance] = []
        for span in found:
            predicted, probability = classify_span(
                classifier, sentence.text, span, cfg.context_window
            )
            key = class_wire(predicted)
            stats.spans_classified_per_class[key] = (
                stats.spans_classified_per_class.get(key, 0) + 1
            )
            if (
                predicted is not None
                and predicted in sentence.labels
                and probability >= cfg.probability_threshold
            ):
                stats.spans_accepted += 1
                accepted.append(Span(span.start, span.end, predicted))
                provenance.append(
                    SpanProvenance(
                        span.start, span.end, predicted, probability, sentence.labels
                    )
                )
            else:
                stats.spans_rejected_disagreement += 1
        if accepted:
            stats.sentences_emitted += 1
            examples.append(
                AlignedExample(
                    sentence.id, sentence.text, tuple(accepted), tuple(provenance)
                )
            )
    return examples, stats


# --- sentence corpus --------------------------------------------------------


def sentence_from_json(obj: dict, where: str = "sentence corpus") -> LabeledSentence:
    try:
        sid, text = str(obj["id"]), obj["text"]
    except KeyError as exc:
        raise CorpusFormatError(f"{where}: record missing {exc}") from exc
    if not isinstance(text, str) or not text:
        raise CorpusFormatError(f"{where}: sentence {sid!r} has no text")
    return LabeledSentence(sid, text, parse_label_list(obj.get("labels", []), where))


def read_sentences(path: str | Path) -> list[LabeledSentence]:
    return [sentence_from_json(obj, str(path)) for obj in iter_jsonl(path)]


def write_sentences(path: str | Path, sentences: Iterable[LabeledSentence]) -> int:
    return write_jsonl(
        path,
        (
            {"id": s.id, "text": s.text, "labels": sorted(l.wire for l in s.labels)}
            for s in sentences
        ),
    )


# --- review queue and decisions ---------------------------------------------

ACTIONS = ("accept", "reject", "edit")


@dataclass(frozen=True)
class ReviewItem:
    example: AlignedExample
    status: str = "pending"

    def to_json(self) -> dict:
        return {
            "id": self.example.id,
            "text": self.example.text,
            "spans": [span_to_json(s) for s in self.example.spans],
            "provenance": [p.to_json() for p in self.example.provenance],
            "status": self.status,
        }


def review_item_from_json(obj: dict) -> ReviewItem:
    try:
        example = AlignedExample(
            str(obj["id"]),
            obj["text"],
            tuple(span_from_json(s) for s in obj["spans"]),
            tuple(SpanProvenance.from_json(p) for p in obj.get("provenance", [])),
        )
        return ReviewItem(example, obj.get("status", "pending"))
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusFormatError(f"bad review item: {exc}") from exc


@dataclass(frozen=True)
class ReviewDecision:
    item_id: str
    action: str
    reviewer: str
    timestamp: str  # ISO-8601, UTC
    edited_spans: Optional[tuple[Span, ...]] = None

    def to_json(self) -> dict:
        obj = {
            "item_id": self.item_id,
            "action": self.action,
            "reviewer": self.reviewer,
            "timestamp": self.timestamp,
        }
        if self.edited_spans is not None:
            obj["edited_spans"] = [span_to_json(s) for s in self.edited_spans]
        return obj


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def parse_timestamp(value: str) -> datetime:
    try:
        return datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError as exc:
        raise MalformedDecisionError(f"bad timestamp {value!r}") from exc


def decision_from_json(obj: dict) -> ReviewDecision:
    """Validate and build a decision record; raises MalformedDecisionError."""
    missing = {"item_id", "action", "reviewer", "timestamp"} - set(obj)
    if missing:
        raise MalformedDecisionError(f"decision missing fields: {sorted(missing)}")
    action = obj["action"]
    if action not in ACTIONS:
        raise MalformedDecisionError(f"unknown action {action!r}")
    if action == "edit":
        if "edited_spans" not in obj or not isinstance(obj["edited_spans"], list):
            raise MalformedDecisionError("edit decision requires edited_spans")
        try:
            edited = tuple(span_from_json(s) for s in obj["edited_spans"])
        except CorpusFormatError as exc:
            raise MalformedDecisionError(str(exc)) from exc
    elif "edited_spans" in obj:
        raise MalformedDecisionError("edited_spans is only valid with action=edit")
    else:
        edited = None
    parse_timestamp(obj["timestamp"])
    return ReviewDecision(
        str(obj["item_id"]), action, str(obj["reviewer"]), str(obj["timestamp"]), edited
    )


def export_review_queue(examples: Sequence[AlignedExample], path: str | Path) -> int:
    """Write pending review items, stably ordered by id; deterministic."""
    items = [ReviewItem(e) for e in sorted(examples, key=lambda e: e.id)]
    return write_jsonl(path, (item.to_json() for item in items))


def read_review_queue(path: str | Path) -> list[ReviewItem]:
    return [review_item_from_json(obj) for obj in iter_jsonl(path)]


def read_decisions(path: str | Path) -> list[ReviewDecision]:
    return [decision_from_json(obj) for obj in iter_jsonl(path)]


def append_decision(path: str | Path, decision: ReviewDecision) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(dumps_record(decision.to_json()) + "\n")


def latest_decisions(
    decisions: Sequence[ReviewDecision],
) -> dict[str, ReviewDecision]:
    """Latest decision per item by timestamp; ties resolved by file order."""
    chosen: dict[str, tuple[datetime, int, ReviewDecision]] = {}
    for order, decision in enumerate(decisions):
        stamp = parse_timestamp(decision.timestamp)
        current = chosen.get(decision.item_id)
        if current is None or (stamp, order) >= current[:2]:
            chosen[decision.item_id] = (stamp, order, decision)
    return {item_id: entry[2] for item_id, entry in chosen.items()}


def apply_decisions(
    queue: Sequence[ReviewItem], decisions: Sequence[ReviewDecision]
) -> list[SpanDocument]:
    """Replay the decision log over the queue and emit the final corpus.

    Accept passes spans through, reject drops the item, edit substitutes the
    reviewer's spans; undecided items are dropped (review is mandatory).
    """
    by_id = {item.example.id: item for item in queue}
    unknown = [d.item_id for d in decisions if d.item_id not in by_id]
    if unknown:
        raise UnknownItemError(f"decisions reference unknown items: {unknown[:5]}")

    final = latest_decisions(decisions)
    corpus: list[SpanDocument] = []
    for item in queue:
        decision = final.get(item.example.id)
        if decision is None or decision.action == "reject":
            continue
        if decision.action == "accept":
            spans = item.example.spans
        else:
            spans = decision.edited_spans or ()
            for span in spans:
                if span.end > len(item.example.text):
                    raise InvalidEditedSpanError(
                        f"item {item.example.id!r}: edited span {span} "
                        "reaches past end of text"
                    )
            try:
                check_non_overlapping(spans)
            except OverlapError as exc:
                raise InvalidEditedSpanError(
                    f"item {item.example.id!r}: {exc}"
                ) from exc
        corpus.append(SpanDocument(item.example.id, item.example.text, tuple(spans)))
    return corpus


def apply_decision_files(
    queue_path: str | Path, decisions_path: str | Path
) -> list[SpanDocument]:
    queue = read_review_queue(queue_path)
    decisions = (
        read_decisions(decisions_path) if Path(decisions_path).exists() else []
    )
    return apply_decisions(queue, decisions)


def auto_accept_corpus(examples: Sequence[AlignedExample]) -> list[SpanDocument]:
    """The --auto-accept path: every aligned example passes review as-is."""
    return [
        SpanDocument(e.id, e.text, e.spans)
        for e in sorted(examples, key=lambda e: e.id)
    ]
