"""Multinomial logistic classifier for identity-target prediction.

Five classes: the four categories plus NONE (no listed group targeted),
which the alignment filter needs as a rejection outcome.  NONE is
represented as Python None in the class tuple and as "none" on the wire.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyDatasetError,
    ModelAlphabetError,
)
from .features import FeatureConfig, SparseVector, text_features
from .text import CategoryLabel
from .train import BestCheckpoint, EpochCallback, TrainConfig, iter_batches

ClassLabel = Optional[CategoryLabel]

#: Canonical class order: category declaration order, then NONE.
CLASSIFIER_CLASSES: tuple[ClassLabel, ...] = tuple(CategoryLabel) + (None,)

Dataset = Sequence[tuple[str, ClassLabel]]


def class_wire(cls: ClassLabel) -> str:
    return cls.wire if cls else "none"


def class_from_wire(name: str) -> ClassLabel:
    return None if name == "none" else CategoryLabel.from_wire(name)


@dataclass
class ClassifierModel:
    classes: tuple[ClassLabel, ...]
    feature_config: FeatureConfig
    weights: np.ndarray  # [C, hash_dimension]
    bias: np.ndarray  # [C]

    def __post_init__(self) -> None:
        c = len(self.classes)
        if self.weights.shape != (c, self.feature_config.hash_dimension):
            raise ValueError(f"weight matrix shape {self.weights.shape} is wrong")
        if self.bias.shape != (c,):
            raise ValueError(f"bias shape {self.bias.shape} is wrong")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ValueError("model weights must be finite")

    def class_index(self, cls: ClassLabel) -> int:
        try:
            return self.classes.index(cls)
        except ValueError:
            raise ModelAlphabetError(
                f"class {class_wire(cls)!r} not in model alphabet"
            ) from None


def zero_model(
    classes: Sequence[ClassLabel] = CLASSIFIER_CLASSES,
    feature_config: Optional[FeatureConfig] = None,
) -> ClassifierModel:
    cfg = feature_config or FeatureConfig()
    c = len(classes)
    return ClassifierModel(
        tuple(classes), cfg, np.zeros((c, cfg.hash_dimension)), np.zeros(c)
    )


def scores(model: ClassifierModel, vec: SparseVector) -> np.ndarray:
    if vec.dimension != model.feature_config.hash_dimension:
        raise DimensionMismatchError(
            f"vector dimension {vec.dimension} != model dimension "
            f"{model.feature_config.hash_dimension}"
        )
    s = model.bias.copy()
    if len(vec):
        s += model.weights[:, vec.indices] @ vec.values
    return s


def softmax(s: np.ndarray) -> np.ndarray:
    e = np.exp(s - np.max(s))
    return e / e.sum()


def predict(model: ClassifierModel, vec: SparseVector) -> np.ndarray:
    """Class distribution for a feature vector (ordered as model.classes)."""
    return softmax(scores(model, vec))


def predict_text(model: ClassifierModel, text: str) -> tuple[ClassLabel, float]:
    """Argmax class and its probability; ties go to the lowest class index."""
    probs = predict(model, text_features(text, model.feature_config))
    best = int(np.argmax(probs))
    return model.classes[best], float(probs[best])


def nll_and_grad(
    model: ClassifierModel,
    batch: Sequence[tuple[SparseVector, int]],
    l2: float = 0.0,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy over the batch plus exact gradients.

    Returns (loss, grad_weights, grad_bias); the bias is not regularized.
    """
    g_w = np.zeros_like(model.weights)
    g_b = np.zeros_like(model.bias)
    loss = 0.0
    for vec, gold in batch:
        probs = predict(model, vec)
        loss -= float(np.log(probs[gold]))
        coef = probs.copy()
        coef[gold] -= 1.0
        if len(vec):
            g_w[:, vec.indices] += coef[:, None] * vec.values[None, :]
        g_b += coef
    loss /= len(batch)
    g_w /= len(batch)
    g_b /= len(batch)
    if l2:
        loss += 0.5 * l2 * float(np.sum(model.weights**2))
        g_w += l2 * model.weights
    return loss, g_w, g_b


def mean_nll(model: ClassifierModel, batch: Sequence[tuple[SparseVector, int]]) -> float:
    total = 0.0
    for vec, gold in batch:
        total -= float(np.log(predict(model, vec)[gold]))
    return total / len(batch)


def train(
    dataset: Dataset,
    cfg: TrainConfig,
    validation: Optional[Dataset] = None,
    *,
    classes: Sequence[ClassLabel] = CLASSIFIER_CLASSES,
    feature_config: Optional[FeatureConfig] = None,
    callback: Optional[EpochCallback] = None,
) -> ClassifierModel:
    """Mini-batch gradient descent, mirroring the tagger's training loop."""
    if not dataset:
        raise EmptyDatasetError("cannot train a classifier on an empty dataset")
    if validation is not None and not validation:
        raise EmptyDatasetError("validation set is empty")
    model = zero_model(classes, feature_config)

    def prepare(pairs: Dataset) -> list[tuple[SparseVector, int]]:
        return [
            (text_features(text, model.feature_config), model.class_index(cls))
            for text, cls in pairs
        ]

    cached = prepare(dataset)
    val = prepare(validation) if validation is not None else cached

    rng = np.random.default_rng(cfg.seed)
    checkpoint = BestCheckpoint(cfg.patience)
    checkpoint.update(mean_nll(model, val), (model.weights, model.bias))

    shrink = 1.0 - cfg.learning_rate * cfg.l2
    for epoch in range(cfg.epochs):
        epoch_loss = 0.0
        for batch_idx in iter_batches(len(cached), cfg.batch_size, rng):
            batch = [cached[i] for i in batch_idx]
            loss, g_w, g_b = nll_and_grad(model, batch)
            epoch_loss += loss * len(batch)
            model.weights *= shrink
            model.weights -= cfg.learning_rate * g_w
            model.bias -= cfg.learning_rate * g_b
        train_loss = epoch_loss / len(cached) + 0.5 * cfg.l2 * float(
            np.sum(model.weights**2)
        )
        val_loss = mean_nll(model, val)
        if callback:
            callback(epoch, train_loss, val_loss)
        if checkpoint.update(val_loss, (model.weights, model.bias)):
            break

    assert checkpoint.best_state is not None
    model.weights, model.bias = checkpoint.best_state
    return model
