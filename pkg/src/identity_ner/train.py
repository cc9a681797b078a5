"""Shared training machinery for the two gradient-trained models.

Plain mini-batch gradient descent with a fixed shuffling seed: both
objectives are convex, so nothing fancier is needed, and determinism
matters more than speed here (same seed, same data -> bit-identical
weights).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    l2: float = 1e-4
    epochs: int = 20
    batch_size: int = 8
    seed: int = 42
    patience: int = 3

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or self.l2 < 0:
            raise ValueError("learning_rate must be > 0 and l2 >= 0")
        if self.epochs <= 0 or self.batch_size <= 0 or self.patience <= 0:
            raise ValueError("epochs, batch_size and patience must be positive")

    def to_json(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "l2": self.l2,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "patience": self.patience,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TrainConfig":
        return cls(**{k: obj[k] for k in cls.__dataclass_fields__ if k in obj})


#: Optional progress hook: (epoch, mean train loss, mean validation loss).
EpochCallback = Callable[[int, float, float], None]


def iter_batches(
    n: int, batch_size: int, rng: np.random.Generator
) -> Iterator[np.ndarray]:
    """Yield index batches over a fresh permutation of range(n)."""
    perm = rng.permutation(n)
    for lo in range(0, n, batch_size):
        yield perm[lo : lo + batch_size]


class BestCheckpoint:
    """Tracks the lowest validation loss and stops after ``patience``
    consecutive epochs without improvement."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best_loss = float("inf")
        self.best_state: Optional[tuple[np.ndarray, ...]] = None
        self._bad_epochs = 0

    def update(self, loss: float, arrays: tuple[np.ndarray, ...]) -> bool:
        """Record an epoch result; returns True when training should stop."""
        if loss < self.best_loss:
            self.best_loss = loss
            self.best_state = tuple(a.copy() for a in arrays)
            self._bad_epochs = 0
        else:
            self._bad_epochs += 1
        return self._bad_epochs >= self.patience
