"""Deterministic hashed feature extraction.

Feature names are hashed with 64-bit FNV-1a over their UTF-8 bytes and
masked to the configured power-of-two dimension, so there is no vocabulary
file and two implementations of the same name list produce the same vector.
Distinct names may collide on an index; collisions simply add.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .text import TokenizedText, tokenize

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def hash_feature(name: str, dimension: int) -> int:
    """FNV-1a(64) of the UTF-8 bytes of ``name``, masked to ``dimension``."""
    h = _FNV_OFFSET
    for byte in name.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h & (dimension - 1)


@dataclass(frozen=True)
class FeatureConfig:
    """Extraction settings; stored inside model files so loading a model
    pins the extraction exactly."""

    hash_dimension: int = 2**18
    window: int = 2
    lowercase: bool = True
    char_ngram_min: int = 3
    char_ngram_max: int = 5

    def __post_init__(self) -> None:
        if self.hash_dimension <= 0 or self.hash_dimension & (self.hash_dimension - 1):
            raise ValueError("hash_dimension must be a power of two")
        if self.window < 0:
            raise ValueError("window must be >= 0")
        if not 0 < self.char_ngram_min <= self.char_ngram_max:
            raise ValueError("char n-gram range must satisfy 0 < min <= max")

    def to_json(self) -> dict:
        return {
            "hash_dimension": self.hash_dimension,
            "window": self.window,
            "lowercase": self.lowercase,
            "char_ngram_min": self.char_ngram_min,
            "char_ngram_max": self.char_ngram_max,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FeatureConfig":
        return cls(**{k: obj[k] for k in cls.__dataclass_fields__ if k in obj})


class SparseVector:
    """Immutable sparse vector: sorted indices plus parallel values.

    Zero-valued entries are dropped at construction; indices are unique.
    """

    __slots__ = ("dimension", "indices", "values")

    def __init__(self, dimension: int, entries: dict[int, float]):
        self.dimension = dimension
        items = sorted((i, v) for i, v in entries.items() if v != 0.0)
        for i, _ in items:
            if not 0 <= i < dimension:
                raise ValueError(f"index {i} out of range for dimension {dimension}")
        self.indices = np.array([i for i, _ in items], dtype=np.int64)
        self.values = np.array([v for _, v in items], dtype=np.float64)

    def __len__(self) -> int:
        return len(self.indices)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, SparseVector)
            and self.dimension == other.dimension
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    def to_dict(self) -> dict[int, float]:
        return {int(i): float(v) for i, v in zip(self.indices, self.values)}

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.values**2)))


def _hashed(names: Iterable[str], weights: Iterable[float], cfg: FeatureConfig) -> SparseVector:
    acc: dict[int, float] = {}
    for name, w in zip(names, weights):
        idx = hash_feature(name, cfg.hash_dimension)
        acc[idx] = acc.get(idx, 0.0) + w
    return SparseVector(cfg.hash_dimension, acc)


def word_shape(word: str) -> str:
    """Compressed shape: uppercase -> X, lowercase -> x, digit -> 9, other
    kept as-is; runs of the same shape character collapse to one."""
    out: list[str] = []
    for ch in word:
        if ch.isupper():
            s = "X"
        elif ch.islower():
            s = "x"
        elif ch.isdigit():
            s = "9"
        else:
            s = ch
        if not out or out[-1] != s:
            out.append(s)
    return "".join(out)


def token_features(doc: TokenizedText, position: int, cfg: FeatureConfig) -> SparseVector:
    """Indicator features for the token at ``position``."""
    n = len(doc.tokens)
    if not 0 <= position < n:
        raise IndexError(f"token position {position} out of range (0..{n - 1})")

    def norm(surface: str) -> str:
        return surface.lower() if cfg.lowercase else surface

    word = doc.tokens[position].surface
    w = norm(word)
    names = [f"w={w}", f"shape={word_shape(word)}"]
    for k in (1, 2, 3):
        if len(w) >= k:
            names.append(f"pre{k}={w[:k]}")
            names.append(f"suf{k}={w[-k:]}")
    for offset in range(-cfg.window, cfg.window + 1):
        if offset == 0:
            continue
        j = position + offset
        if 0 <= j < n:
            names.append(f"w[{offset:+d}]={norm(doc.tokens[j].surface)}")
    if position == 0:
        names.append("BOS")
    if position == n - 1:
        names.append("EOS")
    return _hashed(names, [1.0] * len(names), cfg)


def text_features(text: str, cfg: FeatureConfig) -> SparseVector:
    """Bag of word unigrams + bigrams + character n-grams, L2-normalized."""
    normalized = text.lower() if cfg.lowercase else text
    words = [tok.surface for tok in tokenize(normalized).tokens]
    names = [f"u={w}" for w in words]
    names += [f"b={a}_{b}" for a, b in zip(words, words[1:])]
    for k in range(cfg.char_ngram_min, cfg.char_ngram_max + 1):
        names += [f"c{k}={normalized[i:i + k]}" for i in range(len(normalized) - k + 1)]
    vec = _hashed(names, [1.0] * len(names), cfg)
    n = vec.norm()
    if n > 0.0:
        vec = SparseVector(
            cfg.hash_dimension,
            {int(i): float(v / n) for i, v in zip(vec.indices, vec.values)},
        )
    return vec
