"""Synthetic corpus generator.

Composes short comments from two patterns: a decoupled attack (attack verb
plus a neutral group mention, like "inflame black people") and a coupled
one where the mention itself carries the offense.  Mentions are drawn from
the bundled per-category lexicon, so each sentence's label and gold span
are correct by construction and the four categories stay balanced.
"""

from __future__ import annotations

import random
from typing import Optional, Sequence

from .alignment import LabeledSentence
from .corpus import SpanDocument
from .lexicon import LEXICON
from .text import CategoryLabel, Span

ATTACK_VERBS = (
    "inflame", "attack", "smear", "harass", "mock", "blame", "insult", "provoke",
)

#: Attack verb and mention are separate tokens.
DECOUPLED_TEMPLATES = (
    "they {verb} {mention} online",
    "these posts {verb} {mention} again",
    "stop trying to {verb} {mention}",
    "that page will {verb} {mention} daily",
    "users {verb} {mention} in every reply",
)

#: The mention itself is the offensive part; no separate attack verb.
COUPLED_TEMPLATES = (
    "typical {mention} nonsense everywhere",
    "another rant about {mention} trouble",
    "{mention} ruin every thread",
    "so much {mention} drama today",
)

COLLECTIVES = ("people", "folks", "groups", "communities")


def _render(template: str, verb: str, mention: str) -> tuple[str, int, int]:
    """Fill a template and return (text, mention start, mention end)."""
    prefix, suffix = template.split("{mention}")
    prefix = prefix.replace("{verb}", verb)
    suffix = suffix.replace("{verb}", verb)
    start = len(prefix)
    return prefix + mention + suffix, start, start + len(mention)


def generate_synthetic_corpus(
    size: int,
    seed: int,
    lexicon: Optional[dict[CategoryLabel, Sequence[str]]] = None,
) -> tuple[list[LabeledSentence], list[SpanDocument]]:
    """Deterministically generate ``size`` labeled sentences with gold spans."""
    if size < 1:
        raise ValueError("size must be >= 1")
    words = lexicon or LEXICON
    rng = random.Random(seed)

    # strict category cycling: any contiguous split stays (near-)balanced,
    # so no class prior leaks into the models trained on a split
    categories = [tuple(CategoryLabel)[i % 4] for i in range(size)]

    sentences: list[LabeledSentence] = []
    gold: list[SpanDocument] = []
    for i, category in enumerate(categories):
        mention = rng.choice(words[category])
        if rng.random() < 0.5:
            mention = f"{mention} {rng.choice(COLLECTIVES)}"
        if rng.random() < 0.5:
            template = rng.choice(DECOUPLED_TEMPLATES)
        else:
            template = rng.choice(COUPLED_TEMPLATES)
        text, start, end = _render(template, rng.choice(ATTACK_VERBS), mention)
        doc_id = f"synth-{i:04d}"
        sentences.append(LabeledSentence(doc_id, text, frozenset({category})))
        gold.append(SpanDocument(doc_id, text, (Span(start, end, category),)))
    return sentences, gold


def three_way_split(
    items: Sequence, train: float = 0.8, validation: float = 0.1
) -> tuple[list, list, list]:
    """Contiguous train/validation/test split (generation already shuffled)."""
    n = len(items)
    n_train = max(1, int(n * train))
    n_val = max(1, int(n * validation))
    if n_train + n_val >= n:
        n_train = max(1, n - 2)
        n_val = 1
    return (
        list(items[:n_train]),
        list(items[n_train : n_train + n_val]),
        list(items[n_train + n_val :]),
    )
