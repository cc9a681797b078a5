import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from identity_ner.features import (
    FeatureConfig,
    SparseVector,
    hash_feature,
    text_features,
    token_features,
    word_shape,
)
from identity_ner.text import tokenize

CFG = FeatureConfig(hash_dimension=2**14)


class TestHash:
    # published FNV-1a 64-bit test vectors; masking to 2**64 is a no-op
    @pytest.mark.parametrize(
        "name,expected",
        [
            ("", 0xCBF29CE484222325),
            ("a", 0xAF63DC4C8601EC8C),
            ("foobar", 0x85944171F73967E8),
        ],
    )
    def test_reference_vectors(self, name, expected):
        assert hash_feature(name, 2**64) == expected

    def test_masked_below_dimension(self):
        for name in ("w=black", "shape=Xx", "u=muslim", "ünïcode"):
            assert 0 <= hash_feature(name, 2**10) < 2**10

    def test_stable_across_calls(self):
        assert hash_feature("w=black", 2**18) == hash_feature("w=black", 2**18)

    def test_collisions_are_possible_and_tolerated(self):
        # pigeonhole at dimension 2: some pair of names must collide
        hashes = {hash_feature(str(i), 2) for i in range(3)}
        assert len(hashes) <= 2


class TestSparseVector:
    def test_drops_zeros_and_sorts(self):
        v = SparseVector(8, {5: 0.0, 3: 1.0, 1: 2.0})
        assert v.to_dict() == {1: 2.0, 3: 1.0}
        assert list(v.indices) == [1, 3]

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            SparseVector(4, {4: 1.0})


class TestWordShape:
    @pytest.mark.parametrize(
        "word,shape",
        [("Hamas", "Xx"), ("ABC", "X"), ("a1b2", "x9x9"), ("don't", "x'x"),
         ("LGBT", "X"), ("Covid19", "Xx9")],
    )
    def test_shapes(self, word, shape):
        assert word_shape(word) == shape


class TestTokenFeatures:
    def test_bos_eos_markers(self):
        doc = tokenize("one two three")
        bos = hash_feature("BOS", CFG.hash_dimension)
        eos = hash_feature("EOS", CFG.hash_dimension)
        assert bos in token_features(doc, 0, CFG).to_dict()
        assert eos in token_features(doc, 2, CFG).to_dict()
        assert bos not in token_features(doc, 1, CFG).to_dict()

    def test_shape_feature_present(self):
        doc = tokenize("Hamas bombed")
        idx = hash_feature("shape=Xx", CFG.hash_dimension)
        assert idx in token_features(doc, 0, CFG).to_dict()

    def test_deterministic(self):
        doc = tokenize("same sentence twice over")
        for i in range(len(doc.tokens)):
            assert token_features(doc, i, CFG) == token_features(doc, i, CFG)

    def test_out_of_range_position(self):
        with pytest.raises(IndexError):
            token_features(tokenize("a"), 1, CFG)

    def test_window_features_differ_by_context(self):
        a = tokenize("red apple pie")
        b = tokenize("green apple pie")
        assert token_features(a, 1, CFG) != token_features(b, 1, CFG)


class TestTextFeatures:
    def test_empty_text_zero_vector(self):
        v = text_features("", CFG)
        assert len(v) == 0
        assert v.dimension == CFG.hash_dimension

    def test_case_folding(self):
        assert text_features("muslim", CFG) == text_features("Muslim", CFG)

    def test_case_matters_when_disabled(self):
        cfg = FeatureConfig(hash_dimension=2**14, lowercase=False)
        assert text_features("muslim", cfg) != text_features("Muslim", cfg)

    @given(st.text(min_size=1, max_size=40))
    @settings(max_examples=150)
    def test_nonzero_output_has_unit_norm(self, text):
        v = text_features(text, CFG)
        if len(v):
            assert v.norm() == pytest.approx(1.0, abs=1e-9)

    def test_dimension_always_matches_config(self):
        for dim in (2**8, 2**12):
            cfg = FeatureConfig(hash_dimension=dim)
            assert text_features("whatever text", cfg).dimension == dim

    def test_shuffling_words_changes_only_ngram_groups(self):
        # char n-grams disabled by a window longer than the text
        cfg = FeatureConfig(hash_dimension=2**16, char_ngram_min=64, char_ngram_max=64)
        a = text_features("alpha beta gamma", cfg)
        b = text_features("gamma alpha beta", cfg)
        unigram_idx = {
            hash_feature(f"u={w}", cfg.hash_dimension)
            for w in ("alpha", "beta", "gamma")
        }
        bigram_idx = {i for i in a.to_dict() | b.to_dict() if i not in unigram_idx}
        assert unigram_idx.isdisjoint(bigram_idx)
        for i in unigram_idx:
            assert a.to_dict()[i] == pytest.approx(b.to_dict()[i])
        assert {i for i in a.to_dict() if i in bigram_idx} != {
            i for i in b.to_dict() if i in bigram_idx
        }


class TestFeatureConfig:
    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            FeatureConfig(hash_dimension=1000)

    def test_rejects_negative_window(self):
        with pytest.raises(ValueError):
            FeatureConfig(window=-1)

    def test_json_roundtrip(self):
        cfg = FeatureConfig(hash_dimension=2**12, window=3, lowercase=False)
        assert FeatureConfig.from_json(cfg.to_json()) == cfg
