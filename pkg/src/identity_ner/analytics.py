"""Case-study analytics over annotated social-media comments.

Three computations: per-post mention counts by category (a comment counts
once per category, however many spans of it appear), intra/inter-category
intersection counts over span pairs inside one comment, and the Pearson
correlation matrix between post interaction counts and mention counts.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .corpus import iter_jsonl, span_from_json
from .errors import ConstantVectorError, CorpusFormatError, LengthMismatchError
from .text import CategoryLabel, Span, check_non_overlapping

#: Column order used by the mention and correlation tables.
CATEGORY_ORDER: tuple[CategoryLabel, ...] = (
    CategoryLabel.GENDER,
    CategoryLabel.ETHNICITY,
    CategoryLabel.SEXUAL_ORIENTATION,
    CategoryLabel.RELIGION,
)

INTERACTION_VARIABLES = ("Comments", "Shares", "Reactions")
VARIABLE_NAMES = INTERACTION_VARIABLES + tuple(
    c.display if c is not CategoryLabel.SEXUAL_ORIENTATION else "Sexual Or."
    for c in CATEGORY_ORDER
)


@dataclass(frozen=True)
class PostRecord:
    post_id: str
    category: CategoryLabel
    comments: int
    shares: int
    reactions: int
    headline: Optional[str] = None
    date: Optional[str] = None

    def __post_init__(self) -> None:
        if min(self.comments, self.shares, self.reactions) < 0:
            raise ValueError("interaction counts must be >= 0")


@dataclass(frozen=True)
class MentionRecord:
    post_id: str
    comment_id: str
    spans: tuple[Span, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        check_non_overlapping(self.spans)


IntersectionKey = tuple[str, str]


def intersection_key(a: CategoryLabel, b: CategoryLabel) -> IntersectionKey:
    """Unordered pair of category letters, canonicalized alphabetically."""
    return tuple(sorted((a.letter, b.letter)))  # type: ignore[return-value]


@dataclass
class MentionTable:
    """Comments-with-mentions counts, per post and per category."""

    per_post: dict[str, Counter]
    totals: Counter

    def count(self, post_id: str, category: CategoryLabel) -> int:
        return self.per_post.get(post_id, Counter())[category]


def count_mentions(records: Iterable[MentionRecord]) -> MentionTable:
    """Count, per post and category, the comments containing at least one
    span of that category."""
    per_post: dict[str, Counter] = {}
    totals: Counter = Counter()
    for record in records:
        present = {s.label for s in record.spans if s.label is not None}
        if not present:
            continue
        bucket = per_post.setdefault(record.post_id, Counter())
        for category in present:
            bucket[category] += 1
            totals[category] += 1
    return MentionTable(per_post, totals)


def count_intersections(
    records: Iterable[MentionRecord],
) -> dict[str, dict[IntersectionKey, int]]:
    """Per post: every unordered pair of spans in one comment contributes 1
    to the pair of their category letters (C(m,2) pairs for m spans)."""
    out: dict[str, dict[IntersectionKey, int]] = {}
    for record in records:
        labels = [s.label for s in record.spans if s.label is not None]
        for a, b in combinations(labels, 2):
            bucket = out.setdefault(record.post_id, {})
            key = intersection_key(a, b)
            bucket[key] = bucket.get(key, 0) + 1
    return out


def format_intersections(counts: dict[IntersectionKey, int]) -> str:
    """"(X,Y,n)" entries: self-pairs first, then cross pairs, alphabetical;
    "-" when there is nothing to report."""
    if not counts:
        return "-"
    self_pairs = sorted(k for k in counts if k[0] == k[1])
    cross_pairs = sorted(k for k in counts if k[0] != k[1])
    return ",".join(
        f"({a},{b},{counts[(a, b)]})" for a, b in self_pairs + cross_pairs
    )


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation; undefined for constant input."""
    if len(x) != len(y):
        raise LengthMismatchError(f"vectors of length {len(x)} and {len(y)}")
    if len(x) < 2:
        raise ConstantVectorError("need at least two observations")
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sx = float(np.sqrt(np.sum(dx * dx)))
    sy = float(np.sqrt(np.sum(dy * dy)))
    if sx == 0.0 or sy == 0.0:
        raise ConstantVectorError("correlation undefined for a constant vector")
    return float(np.clip(np.sum(dx * dy) / (sx * sy), -1.0, 1.0))


@dataclass
class CorrelationMatrix:
    variables: tuple[str, ...]
    values: np.ndarray  # [7, 7]; NaN marks undefined cells

    def cell(self, i: int, j: int) -> Optional[float]:
        v = self.values[i, j]
        return None if np.isnan(v) else float(v)


def correlation_matrix(
    posts: Sequence[PostRecord], mentions: MentionTable
) -> CorrelationMatrix:
    """Pearson correlations between interaction variables and per-post
    mention counts (variable order: Comments, Shares, Reactions, then the
    four categories).  Constant columns yield undefined (NaN) cells."""
    if len(posts) < 2:
        raise ConstantVectorError("need at least two posts")
    columns = [
        [float(p.comments) for p in posts],
        [float(p.shares) for p in posts],
        [float(p.reactions) for p in posts],
    ] + [
        [float(mentions.count(p.post_id, cat)) for p in posts]
        for cat in CATEGORY_ORDER
    ]
    k = len(columns)
    values = np.full((k, k), np.nan)
    for i in range(k):
        values[i, i] = 1.0
        for j in range(i + 1, k):
            try:
                r = pearson(columns[i], columns[j])
            except ConstantVectorError:
                continue
            values[i, j] = values[j, i] = r
    return CorrelationMatrix(VARIABLE_NAMES, values)


def format_correlation_matrix(matrix: CorrelationMatrix) -> str:
    """Upper-triangular text table; "n/a" for undefined cells."""
    names = matrix.variables
    rows = [("",) + names]
    for i, name in enumerate(names):
        cells = [name]
        for j in range(len(names)):
            if j < i:
                cells.append("-")
            else:
                v = matrix.cell(i, j)
                cells.append("n/a" if v is None else f"{v:.3f}")
        rows.append(tuple(cells))
    widths = [max(len(r[i]) for r in rows) for i in range(len(names) + 1)]
    return "\n".join(
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        for row in rows
    ) + "\n"


def correlation_matrix_json(matrix: CorrelationMatrix) -> dict:
    return {
        "variables": list(matrix.variables),
        "matrix": [
            [matrix.cell(i, j) for j in range(len(matrix.variables))]
            for i in range(len(matrix.variables))
        ],
    }


# --- file formats -----------------------------------------------------------


def read_posts(path: str | Path) -> list[PostRecord]:
    posts = []
    for obj in iter_jsonl(path):
        try:
            posts.append(
                PostRecord(
                    str(obj["post_id"]),
                    CategoryLabel.from_wire(obj["category"]),
                    int(obj["comments"]),
                    int(obj["shares"]),
                    int(obj["reactions"]),
                    obj.get("headline"),
                    obj.get("date"),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusFormatError(f"{path}: bad post record: {exc}") from exc
    return posts


def read_mentions(path: str | Path) -> list[MentionRecord]:
    records = []
    for obj in iter_jsonl(path):
        try:
            spans = tuple(span_from_json(s) for s in obj.get("spans", []))
            records.append(
                MentionRecord(str(obj["post_id"]), str(obj["comment_id"]), spans)
            )
        except KeyError as exc:
            raise CorpusFormatError(f"{path}: mention record missing {exc}") from exc
    return records


def mention_table_rows(
    table: MentionTable,
    intersections: dict[str, dict[IntersectionKey, int]],
    post_ids: Sequence[str],
) -> list[tuple]:
    """Rows shaped like the per-post mention report: one row per post with
    per-category counts and the formatted intersection summary."""
    rows = []
    for post_id in post_ids:
        counts = [table.count(post_id, cat) for cat in CATEGORY_ORDER]
        rows.append(
            (post_id, *counts, format_intersections(intersections.get(post_id, {})))
        )
    totals = [table.totals[cat] for cat in CATEGORY_ORDER]
    rows.append(("Total", *totals, "-"))
    return rows
