"""Tokenization, spans, and the BIO tag codec.

Offsets everywhere are Unicode code points into the original text, which is
what Python string indexing gives us natively.  A span is a half-open
[start, end) range; its label is one of the four identity categories or
None for an untyped (mention-only) span.

Tags are plain strings: ``O``, ``B-RELIGION``, ``I-UNTYPED``, ...  IOB2 is
used throughout — every span starts with a B tag.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .errors import LengthMismatchError, OverlapError, SpanBoundaryError


class CategoryLabel(enum.Enum):
    """The four identity categories, with their one-letter shorthands."""

    RELIGION = "religion"
    ETHNICITY = "ethnicity"
    SEXUAL_ORIENTATION = "sexual_orientation"
    GENDER = "gender"

    @property
    def wire(self) -> str:
        """Lowercase snake-case name used in all file formats."""
        return self.value

    @property
    def letter(self) -> str:
        return _LETTERS[self]

    @property
    def display(self) -> str:
        return _DISPLAY[self]

    @classmethod
    def from_wire(cls, name: str) -> "CategoryLabel":
        return cls(name)

    @classmethod
    def from_letter(cls, letter: str) -> "CategoryLabel":
        for member, l in _LETTERS.items():
            if l == letter:
                return member
        raise ValueError(f"unknown category letter: {letter!r}")


_LETTERS = {
    CategoryLabel.RELIGION: "R",
    CategoryLabel.ETHNICITY: "E",
    CategoryLabel.SEXUAL_ORIENTATION: "S",
    CategoryLabel.GENDER: "G",
}

_DISPLAY = {
    CategoryLabel.RELIGION: "Religion",
    CategoryLabel.ETHNICITY: "Ethnicity",
    CategoryLabel.SEXUAL_ORIENTATION: "Sexual Orientation",
    CategoryLabel.GENDER: "Gender",
}


class Token(NamedTuple):
    surface: str
    start: int
    end: int


@dataclass(frozen=True)
class TokenizedText:
    """Original text plus its tokens with exact character offsets."""

    text: str
    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        prev_end = 0
        for tok in self.tokens:
            if not tok.surface:
                raise ValueError("empty token")
            if tok.start < prev_end:
                raise OverlapError(f"token {tok} overlaps its predecessor")
            if self.text[tok.start : tok.end] != tok.surface:
                raise ValueError(
                    f"token surface {tok.surface!r} != text[{tok.start}:{tok.end}]"
                )
            prev_end = tok.end

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True, order=True)
class Span:
    """Half-open character range, optionally labeled with a category.

    ``label`` is None for untyped spans (mention detected, category unknown).
    """

    start: int
    end: int
    label: Optional[CategoryLabel] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.start < 0 or self.start >= self.end:
            raise ValueError(f"invalid span range [{self.start}, {self.end})")

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end


def tokenize(text: str) -> TokenizedText:
    """Split text into tokens with code-point offsets.

    Maximal runs of alphanumeric code points become one token; every other
    non-whitespace code point is a token by itself; whitespace separates.
    """
    tokens: list[Token] = []
    run_start = -1
    for i, ch in enumerate(text):
        if ch.isalnum():
            if run_start < 0:
                run_start = i
            continue
        if run_start >= 0:
            tokens.append(Token(text[run_start:i], run_start, i))
            run_start = -1
        if not ch.isspace():
            tokens.append(Token(ch, i, i + 1))
    if run_start >= 0:
        tokens.append(Token(text[run_start:], run_start, len(text)))
    return TokenizedText(text, tuple(tokens))


# --- BIO tag alphabet -------------------------------------------------------

OUT = "O"
UNTYPED = "UNTYPED"

#: Tag names in label position: the four categories plus UNTYPED.
_TAG_LABELS = [c.name for c in CategoryLabel] + [UNTYPED]

#: Full 11-tag alphabet: O plus B/I for each label name.
ALL_TAGS: tuple[str, ...] = tuple(
    [OUT] + [f"{p}-{name}" for name in _TAG_LABELS for p in ("B", "I")]
)

#: Tag set for the mention-only tagger.
UNTYPED_TAGS: tuple[str, ...] = (OUT, f"B-{UNTYPED}", f"I-{UNTYPED}")

#: Tag set for the final typed tagger.
TYPED_TAGS: tuple[str, ...] = tuple(
    [OUT] + [f"{p}-{c.name}" for c in CategoryLabel for p in ("B", "I")]
)


def tag_label(tag: str) -> Optional[CategoryLabel]:
    """Category carried by a B/I tag, or None for UNTYPED.  O is invalid."""
    name = tag[2:]
    if name == UNTYPED:
        return None
    return CategoryLabel[name]


def begin_tag(label: Optional[CategoryLabel]) -> str:
    return f"B-{label.name if label else UNTYPED}"


def inside_tag(label: Optional[CategoryLabel]) -> str:
    return f"I-{label.name if label else UNTYPED}"


def check_non_overlapping(spans: Sequence[Span]) -> None:
    """Raise OverlapError if any two spans in the list overlap."""
    ordered = sorted(spans, key=lambda s: (s.start, s.end))
    for a, b in zip(ordered, ordered[1:]):
        if a.overlaps(b):
            raise OverlapError(f"spans {a} and {b} overlap")


def encode_bio(doc: TokenizedText, spans: Sequence[Span]) -> list[str]:
    """IOB2-encode spans onto the document's tokens.

    Every span must start on a token start and end on a token end, else
    SpanBoundaryError: snapping silently would corrupt reviewed data.
    """
    check_non_overlapping(spans)
    tags = [OUT] * len(doc.tokens)
    starts = {tok.start: i for i, tok in enumerate(doc.tokens)}
    ends = {tok.end: i for i, tok in enumerate(doc.tokens)}
    for span in spans:
        if span.end > len(doc.text):
            raise SpanBoundaryError(f"span {span} reaches past end of text")
        first = starts.get(span.start)
        last = ends.get(span.end)
        if first is None or last is None or first > last:
            raise SpanBoundaryError(
                f"span [{span.start}, {span.end}) does not align with token boundaries"
            )
        tags[first] = begin_tag(span.label)
        for i in range(first + 1, last + 1):
            tags[i] = inside_tag(span.label)
    return tags


def decode_bio(doc: TokenizedText, tags: Sequence[str]) -> list[Span]:
    """Turn a tag sequence back into spans.

    An I tag with no compatible B/I before it is repaired to B (a new span
    starts there), so arbitrary tagger output always decodes.
    """
    if len(tags) != len(doc.tokens):
        raise LengthMismatchError(
            f"{len(tags)} tags for {len(doc.tokens)} tokens"
        )
    spans: list[Span] = []
    open_label: Optional[CategoryLabel] = None
    open_start = open_end = -1
    open_any = False

    def close() -> None:
        nonlocal open_any
        if open_any:
            spans.append(Span(open_start, open_end, open_label))
            open_any = False

    for tok, tag in zip(doc.tokens, tags):
        if tag == OUT:
            close()
            continue
        label = tag_label(tag)
        if tag.startswith("B-") or not open_any or label != open_label:
            close()
            open_label, open_start, open_any = label, tok.start, True
        open_end = tok.end
    close()
    return spans
