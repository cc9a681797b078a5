import numpy as np
import pytest

from identity_ner import classifier as clf
from identity_ner import crf
from identity_ner.features import FeatureConfig
from identity_ner.synth import generate_synthetic_corpus
from identity_ner.text import UNTYPED_TAGS
from identity_ner.train import TrainConfig


@pytest.fixture(scope="session")
def small_cfg():
    return FeatureConfig(hash_dimension=2048, window=1)


@pytest.fixture(scope="session")
def quick_train_cfg():
    return TrainConfig(epochs=12, batch_size=8, seed=42)


@pytest.fixture(scope="session")
def synth_corpus():
    return generate_synthetic_corpus(120, seed=7)


@pytest.fixture(scope="session")
def trained_models(small_cfg, quick_train_cfg, synth_corpus):
    """Small but real untyped tagger + classifier trained on synthetic data."""
    from identity_ner.corpus import strip_labels
    from identity_ner.text import encode_bio, tokenize

    sentences, gold = synth_corpus
    tagged = []
    for doc in gold[:80]:
        doc = strip_labels(doc)
        tok = tokenize(doc.text)
        tagged.append((tok, encode_bio(tok, doc.spans)))
    tagger = crf.train(
        tagged, quick_train_cfg, tag_set=UNTYPED_TAGS, feature_config=small_cfg
    )
    pairs = [(s.text, next(iter(s.labels))) for s in sentences[:80]]
    classifier = clf.train(pairs, quick_train_cfg, feature_config=small_cfg)
    return tagger, classifier


def random_crf(rng: np.random.Generator, tag_set, dimension=64, window=1):
    cfg = FeatureConfig(hash_dimension=dimension, window=window)
    model = crf.zero_model(tag_set, cfg)
    model.emission[:] = rng.normal(scale=1.0, size=model.emission.shape)
    model.transitions[:] = rng.normal(scale=1.0, size=model.transitions.shape)
    return model
