"""Linear-chain CRF tagger over hashed token features.

The path score is a single formula: per-position emission scores plus
transition scores, with virtual START/STOP states stored as two extra
rows/columns of the transition matrix (indices T and T+1 for a T-tag
model).  Inference is exact: forward algorithm in log space for the
partition function, forward-backward for marginals, Viterbi for decoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import (
    EmptyDatasetError,
    EmptyDocumentError,
    LengthMismatchError,
    ModelAlphabetError,
)
from .features import FeatureConfig, SparseVector, token_features
from .text import TYPED_TAGS, TokenizedText
from .train import BestCheckpoint, EpochCallback, TrainConfig, iter_batches

Dataset = Sequence[tuple[TokenizedText, Sequence[str]]]


@dataclass
class CrfModel:
    tag_set: tuple[str, ...]
    feature_config: FeatureConfig
    emission: np.ndarray  # [T, hash_dimension]
    transitions: np.ndarray  # [T+2, T+2]; row/col T = START, T+1 = STOP

    def __post_init__(self) -> None:
        t = len(self.tag_set)
        if self.emission.shape != (t, self.feature_config.hash_dimension):
            raise ValueError(f"emission matrix shape {self.emission.shape} is wrong")
        if self.transitions.shape != (t + 2, t + 2):
            raise ValueError(f"transition matrix shape {self.transitions.shape} is wrong")
        if not (np.isfinite(self.emission).all() and np.isfinite(self.transitions).all()):
            raise ValueError("model weights must be finite")

    @property
    def start(self) -> int:
        return len(self.tag_set)

    @property
    def stop(self) -> int:
        return len(self.tag_set) + 1

    def tag_index(self, tag: str) -> int:
        try:
            return self.tag_set.index(tag)
        except ValueError:
            raise ModelAlphabetError(f"tag {tag!r} not in model alphabet") from None


def zero_model(
    tag_set: Sequence[str] = TYPED_TAGS,
    feature_config: Optional[FeatureConfig] = None,
) -> CrfModel:
    cfg = feature_config or FeatureConfig()
    t = len(tag_set)
    return CrfModel(
        tuple(tag_set),
        cfg,
        np.zeros((t, cfg.hash_dimension)),
        np.zeros((t + 2, t + 2)),
    )


def token_vectors(model: CrfModel, doc: TokenizedText) -> list[SparseVector]:
    return [token_features(doc, i, model.feature_config) for i in range(len(doc))]


def emission_scores(
    model: CrfModel, vecs: Sequence[SparseVector]
) -> np.ndarray:
    """Per-position emission score for every tag, shape [n, T]."""
    scores = np.zeros((len(vecs), len(model.tag_set)))
    for i, v in enumerate(vecs):
        if len(v):
            scores[i] = model.emission[:, v.indices] @ v.values
    return scores


def score_path(model: CrfModel, doc: TokenizedText, tags: Sequence[str]) -> float:
    """Unnormalized score of one tag path, START/STOP transitions included."""
    if len(tags) != len(doc):
        raise LengthMismatchError(f"{len(tags)} tags for {len(doc)} tokens")
    trans = model.transitions
    if not tags:
        return float(trans[model.start, model.stop])
    idx = [model.tag_index(t) for t in tags]
    em = emission_scores(model, token_vectors(model, doc))
    total = trans[model.start, idx[0]] + em[0, idx[0]]
    for t in range(1, len(idx)):
        total += trans[idx[t - 1], idx[t]] + em[t, idx[t]]
    total += trans[idx[-1], model.stop]
    return float(total)


def _require_tokens(doc: TokenizedText) -> None:
    if len(doc) == 0:
        raise EmptyDocumentError("document has no tokens")


def _forward(em: np.ndarray, trans: np.ndarray, t_count: int) -> np.ndarray:
    n = em.shape[0]
    inner = trans[:t_count, :t_count]
    alpha = np.empty((n, t_count))
    alpha[0] = trans[t_count, :t_count] + em[0]
    for t in range(1, n):
        alpha[t] = logsumexp(alpha[t - 1][:, None] + inner, axis=0) + em[t]
    return alpha


def _backward(em: np.ndarray, trans: np.ndarray, t_count: int) -> np.ndarray:
    n = em.shape[0]
    inner = trans[:t_count, :t_count]
    beta = np.empty((n, t_count))
    beta[n - 1] = trans[:t_count, t_count + 1]
    for t in range(n - 2, -1, -1):
        beta[t] = logsumexp(inner + (em[t + 1] + beta[t + 1])[None, :], axis=1)
    return beta


def log_partition(model: CrfModel, doc: TokenizedText) -> float:
    """log sum over all tag paths of exp(path score)."""
    _require_tokens(doc)
    em = emission_scores(model, token_vectors(model, doc))
    return _log_partition_from_scores(em, model.transitions, len(model.tag_set))


def _log_partition_from_scores(em: np.ndarray, trans: np.ndarray, t_count: int) -> float:
    alpha = _forward(em, trans, t_count)
    return float(logsumexp(alpha[-1] + trans[:t_count, t_count + 1]))


def viterbi(model: CrfModel, doc: TokenizedText) -> tuple[list[str], float]:
    """Argmax tag path and its score; ties go to the lowest tag index."""
    _require_tokens(doc)
    em = emission_scores(model, token_vectors(model, doc))
    t_count = len(model.tag_set)
    trans = model.transitions
    inner = trans[:t_count, :t_count]

    n = em.shape[0]
    delta = trans[t_count, :t_count] + em[0]
    backptr = np.zeros((n, t_count), dtype=np.intp)
    for t in range(1, n):
        cand = delta[:, None] + inner
        backptr[t] = np.argmax(cand, axis=0)  # first max = lowest index
        delta = cand[backptr[t], np.arange(t_count)] + em[t]
    final = delta + trans[:t_count, t_count + 1]
    last = int(np.argmax(final))
    path = [last]
    for t in range(n - 1, 0, -1):
        path.append(int(backptr[t, path[-1]]))
    path.reverse()
    return [model.tag_set[i] for i in path], float(final[last])


def marginals(model: CrfModel, doc: TokenizedText) -> np.ndarray:
    """Posterior tag distribution per position, shape [n, T]; rows sum to 1.

    The position-wise argmax of these marginals is not in general the
    Viterbi path (max-marginal decoding and MAP decoding are different
    objectives); use viterbi() for the best single path.
    """
    _require_tokens(doc)
    em = emission_scores(model, token_vectors(model, doc))
    return _marginals_from_scores(em, model.transitions, len(model.tag_set))[0]


def _marginals_from_scores(
    em: np.ndarray, trans: np.ndarray, t_count: int
) -> tuple[np.ndarray, list[np.ndarray], float]:
    """Unary marginals, pairwise marginals per adjacent pair, and log Z."""
    alpha = _forward(em, trans, t_count)
    beta = _backward(em, trans, t_count)
    log_z = float(logsumexp(alpha[-1] + trans[:t_count, t_count + 1]))
    unary = np.exp(alpha + beta - log_z)
    inner = trans[:t_count, :t_count]
    pairwise = [
        np.exp(
            alpha[t][:, None] + inner + (em[t + 1] + beta[t + 1])[None, :] - log_z
        )
        for t in range(em.shape[0] - 1)
    ]
    return unary, pairwise, log_z


@dataclass
class CrfGradient:
    emission: np.ndarray
    transitions: np.ndarray


def nll_and_grad(
    model: CrfModel,
    doc: TokenizedText,
    gold_tags: Sequence[str],
    l2: float = 0.0,
) -> tuple[float, CrfGradient]:
    """Negative log-likelihood of the gold path plus its exact gradient.

    loss = -score(gold) + log Z + (l2/2)|w|^2 and the gradient is expected
    feature counts minus observed counts plus l2*w, with expectations from
    forward-backward.
    """
    _require_tokens(doc)
    if len(gold_tags) != len(doc):
        raise LengthMismatchError(f"{len(gold_tags)} tags for {len(doc)} tokens")
    vecs = token_vectors(model, doc)
    gold_idx = [model.tag_index(t) for t in gold_tags]
    loss, g_em_cols, g_trans = _nll_and_grad_cached(model, vecs, gold_idx)

    g_em = np.zeros_like(model.emission)
    for col, coef in g_em_cols.items():
        g_em[:, col] += coef
    if l2:
        loss += 0.5 * l2 * (
            float(np.sum(model.emission**2)) + float(np.sum(model.transitions**2))
        )
        g_em += l2 * model.emission
        g_trans = g_trans + l2 * model.transitions
    return loss, CrfGradient(g_em, g_trans)


def _nll_and_grad_cached(
    model: CrfModel, vecs: Sequence[SparseVector], gold_idx: Sequence[int]
) -> tuple[float, dict[int, np.ndarray], np.ndarray]:
    """Data term of the NLL and its gradient; emission part returned as a
    sparse column map so batch updates stay cheap at 2^18 dimensions."""
    t_count = len(model.tag_set)
    trans = model.transitions
    em = emission_scores(model, vecs)
    unary, pairwise, log_z = _marginals_from_scores(em, trans, t_count)

    n = len(vecs)
    gold_score = trans[model.start, gold_idx[0]] + em[0, gold_idx[0]]
    for t in range(1, n):
        gold_score += trans[gold_idx[t - 1], gold_idx[t]] + em[t, gold_idx[t]]
    gold_score += trans[gold_idx[-1], model.stop]
    loss = float(log_z - gold_score)

    # expected minus observed counts
    g_em_cols: dict[int, np.ndarray] = {}
    for t, vec in enumerate(vecs):
        coef = unary[t].copy()
        coef[gold_idx[t]] -= 1.0
        for col, val in zip(vec.indices, vec.values):
            col = int(col)
            acc = g_em_cols.get(col)
            if acc is None:
                g_em_cols[col] = coef * val
            else:
                acc += coef * val

    g_trans = np.zeros_like(trans)
    for t, pair in enumerate(pairwise):
        g_trans[:t_count, :t_count] += pair
        g_trans[gold_idx[t], gold_idx[t + 1]] -= 1.0
    g_trans[model.start, :t_count] += unary[0]
    g_trans[model.start, gold_idx[0]] -= 1.0
    g_trans[:t_count, model.stop] += unary[-1]
    g_trans[gold_idx[-1], model.stop] -= 1.0
    return loss, g_em_cols, g_trans


def mean_nll(model: CrfModel, dataset: Dataset) -> float:
    """Mean per-example NLL without the regularizer (validation metric)."""
    total = 0.0
    for doc, tags in dataset:
        em = emission_scores(model, token_vectors(model, doc))
        idx = [model.tag_index(t) for t in tags]
        log_z = _log_partition_from_scores(em, model.transitions, len(model.tag_set))
        gold = model.transitions[model.start, idx[0]] + em[0, idx[0]]
        for t in range(1, len(idx)):
            gold += model.transitions[idx[t - 1], idx[t]] + em[t, idx[t]]
        gold += model.transitions[idx[-1], model.stop]
        total += log_z - gold
    return total / len(dataset)


def train(
    dataset: Dataset,
    cfg: TrainConfig,
    validation: Optional[Dataset] = None,
    *,
    tag_set: Sequence[str] = TYPED_TAGS,
    feature_config: Optional[FeatureConfig] = None,
    callback: Optional[EpochCallback] = None,
) -> CrfModel:
    """Mini-batch gradient descent with early stopping on validation loss.

    Deterministic given cfg.seed; returns the best-validation checkpoint,
    which may be the untrained model if no epoch improves on it.
    """
    if not dataset:
        raise EmptyDatasetError("cannot train a tagger on an empty dataset")
    if validation is not None and not validation:
        raise EmptyDatasetError("validation set is empty")
    model = zero_model(tag_set, feature_config)
    val = validation if validation is not None else dataset
    for doc, tags in list(dataset) + list(val):
        _require_tokens(doc)
        if len(tags) != len(doc):
            raise LengthMismatchError(f"{len(tags)} tags for {len(doc)} tokens")
        for tag in tags:
            model.tag_index(tag)

    cached = [
        (token_vectors(model, doc), [model.tag_index(t) for t in tags])
        for doc, tags in dataset
    ]
    rng = np.random.default_rng(cfg.seed)
    checkpoint = BestCheckpoint(cfg.patience)
    checkpoint.update(mean_nll(model, val), (model.emission, model.transitions))

    shrink = 1.0 - cfg.learning_rate * cfg.l2
    for epoch in range(cfg.epochs):
        epoch_loss = 0.0
        for batch in iter_batches(len(cached), cfg.batch_size, rng):
            batch_cols: dict[int, np.ndarray] = {}
            batch_trans = np.zeros_like(model.transitions)
            for i in batch:
                vecs, gold_idx = cached[i]
                loss, g_cols, g_trans = _nll_and_grad_cached(model, vecs, gold_idx)
                epoch_loss += loss
                batch_trans += g_trans
                for col, coef in g_cols.items():
                    acc = batch_cols.get(col)
                    if acc is None:
                        batch_cols[col] = coef.copy()
                    else:
                        acc += coef
            scale = cfg.learning_rate / len(batch)
            # w -= lr * (data_grad / batch + l2 * w), applied as shrink + sparse step
            model.emission *= shrink
            model.transitions *= shrink
            cols = sorted(batch_cols)
            if cols:
                step = np.stack([batch_cols[c] for c in cols], axis=1)
                model.emission[:, cols] -= scale * step
            model.transitions -= scale * batch_trans
        train_loss = epoch_loss / len(cached) + 0.5 * cfg.l2 * (
            float(np.sum(model.emission**2)) + float(np.sum(model.transitions**2))
        )
        val_loss = mean_nll(model, val)
        if callback:
            callback(epoch, train_loss, val_loss)
        if checkpoint.update(val_loss, (model.emission, model.transitions)):
            break

    assert checkpoint.best_state is not None
    model.emission, model.transitions = checkpoint.best_state
    return model
