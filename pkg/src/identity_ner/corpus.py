"""JSONL corpus formats.

The span corpus is the pipeline-wide interchange format, one JSON object
per line::

    {"id": "...", "text": "...",
     "spans": [{"start": 8, "end": 20, "label": "ethnicity"}]}

``label`` is null for untyped spans.  All offsets are code points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import CorpusFormatError
from .text import CategoryLabel, Span, check_non_overlapping


@dataclass(frozen=True)
class SpanDocument:
    id: str
    text: str
    spans: tuple[Span, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        for span in self.spans:
            if span.end > len(self.text):
                raise CorpusFormatError(
                    f"document {self.id!r}: span {span} reaches past end of text"
                )
        check_non_overlapping(self.spans)


def span_to_json(span: Span) -> dict:
    return {
        "start": span.start,
        "end": span.end,
        "label": span.label.wire if span.label else None,
    }


def span_from_json(obj: dict) -> Span:
    try:
        label = obj["label"]
        return Span(
            int(obj["start"]),
            int(obj["end"]),
            CategoryLabel.from_wire(label) if label is not None else None,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusFormatError(f"bad span record {obj!r}: {exc}") from exc


def dumps_record(obj: dict) -> str:
    """Canonical one-line JSON used by every writer (deterministic bytes)."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def iter_jsonl(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON") from exc
            if not isinstance(obj, dict):
                raise CorpusFormatError(f"{path}:{lineno}: expected an object")
            yield obj


def write_jsonl(path: str | Path, records: Iterable[dict]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(dumps_record(record) + "\n")
            count += 1
    return count


def document_to_json(doc: SpanDocument) -> dict:
    return {
        "id": doc.id,
        "text": doc.text,
        "spans": [span_to_json(s) for s in sorted(doc.spans)],
    }


def document_from_json(obj: dict) -> SpanDocument:
    try:
        doc_id, text = str(obj["id"]), obj["text"]
    except KeyError as exc:
        raise CorpusFormatError(f"span record missing field: {exc}") from exc
    if not isinstance(text, str):
        raise CorpusFormatError(f"document {doc_id!r}: text must be a string")
    spans = tuple(span_from_json(s) for s in obj.get("spans", []))
    return SpanDocument(doc_id, text, spans)


def read_span_corpus(path: str | Path) -> list[SpanDocument]:
    return [document_from_json(obj) for obj in iter_jsonl(path)]


def write_span_corpus(path: str | Path, docs: Sequence[SpanDocument]) -> int:
    return write_jsonl(path, (document_to_json(d) for d in docs))


def strip_labels(doc: SpanDocument) -> SpanDocument:
    """Untyped view of a document: every span label dropped."""
    return SpanDocument(
        doc.id, doc.text, tuple(Span(s.start, s.end, None) for s in doc.spans)
    )


def parse_label_list(labels: object, where: str) -> frozenset[CategoryLabel]:
    if not isinstance(labels, list):
        raise CorpusFormatError(f"{where}: labels must be a list")
    try:
        return frozenset(CategoryLabel.from_wire(l) for l in labels)
    except ValueError as exc:
        raise CorpusFormatError(f"{where}: {exc}") from exc
