import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aggdetect.corpus_io import Document
from aggdetect.errors import DataError, ResourceError
from aggdetect.lexfeatures import (
    BuiltinSentimentProvider,
    CategoryLexicon,
    EmbeddingTable,
    SidecarSentimentProvider,
    WeightedLexicon,
    builtin_sentence_sentiment,
    embed_average,
    gender_features,
    liwc_features,
    load_category_lexicon,
    load_embeddings,
    load_sentiment_sidecar,
    load_weighted_lexicon,
    load_word_set,
    sentiment_features,
    split_sentences,
)

from helpers import write_embeddings, write_lines


class TestEmbeddings:
    def test_load(self, tmp_path):
        path = write_embeddings(tmp_path / "e.vec", {"a": [1, 2, 3], "b": [0, 0, 1]})
        table = load_embeddings(path)
        assert len(table) == 2
        assert table.dimension == 3

    def test_arity_mismatch_reports_line(self, tmp_path):
        path = tmp_path / "e.vec"
        path.write_text("2 3\na 1 2 3\nb 1 2\n", encoding="utf-8")
        with pytest.raises(ResourceError, match="line 3"):
            load_embeddings(path)

    def test_duplicate_word(self, tmp_path):
        path = tmp_path / "e.vec"
        path.write_text("2 2\na 1 2\na 3 4\n", encoding="utf-8")
        with pytest.raises(ResourceError, match="duplicate"):
            load_embeddings(path)

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "e.vec"
        path.write_text("not a header\n", encoding="utf-8")
        with pytest.raises(ResourceError, match="header"):
            load_embeddings(path)

    def test_count_mismatch(self, tmp_path):
        path = tmp_path / "e.vec"
        path.write_text("3 2\na 1 2\n", encoding="utf-8")
        with pytest.raises(ResourceError, match="declares 3"):
            load_embeddings(path)


class TestEmbedAverage:
    def test_single_hit(self):
        table = EmbeddingTable({"a": np.array([1.0, 2.0, 3.0])}, 3)
        vec, coverage = embed_average(["a"], table)
        assert vec.tolist() == [1.0, 2.0, 3.0]
        assert coverage == 1.0

    def test_oov_skipped(self):
        table = EmbeddingTable({"a": np.array([2.0, 0.0, 0.0])}, 3)
        vec, coverage = embed_average(["a", "zz"], table)
        assert vec.tolist() == [2.0, 0.0, 0.0]
        assert coverage == 0.5

    def test_mean(self):
        table = EmbeddingTable({"a": np.array([1.0, 0.0]), "b": np.array([3.0, 2.0])}, 2)
        vec, coverage = embed_average(["a", "b"], table)
        assert vec.tolist() == [2.0, 1.0]
        assert coverage == 1.0

    def test_no_hits(self):
        table = EmbeddingTable({"a": np.array([1.0])}, 1)
        vec, coverage = embed_average(["x", "y"], table)
        assert vec.tolist() == [0.0]
        assert coverage == 0.0

    def test_empty_tokens(self):
        table = EmbeddingTable({"a": np.array([1.0])}, 1)
        assert embed_average([], table)[1] == 0.0

    @given(st.permutations(["a", "b", "c"]))
    def test_permutation_invariant(self, tokens):
        table = EmbeddingTable(
            {"a": np.array([1.0, 0.0]), "b": np.array([0.0, 2.0]), "c": np.array([5.0, 5.0])}, 2
        )
        baseline, _cov = embed_average(["a", "b", "c"], table)
        vec, _cov = embed_average(list(tokens), table)
        assert np.allclose(vec, baseline)

    @given(st.floats(min_value=-10, max_value=10, allow_nan=False))
    def test_scale_equivariant(self, c):
        base = {"a": np.array([1.0, 2.0]), "b": np.array([-1.0, 0.5])}
        scaled = EmbeddingTable({w: c * v for w, v in base.items()}, 2)
        plain = EmbeddingTable(base, 2)
        v1, _ = embed_average(["a", "b"], plain)
        v2, _ = embed_average(["a", "b"], scaled)
        assert np.allclose(v2, c * v1, atol=1e-12)


class TestSentimentFeatures:
    def test_single_sentence(self):
        out = sentiment_features([np.array([0, 0, 1, 0, 0.0])])
        assert out[:5].tolist() == [0, 0, 1, 0, 0]
        assert out[5:].tolist() == [0, 0, 0, 0, 0]

    def test_population_std(self):
        sents = [np.array([1, 0, 0, 0, 0.0]), np.array([0, 0, 0, 0, 1.0])]
        out = sentiment_features(sents)
        assert out[:5].tolist() == [0.5, 0, 0, 0, 0.5]
        assert out[5:].tolist() == [0.5, 0, 0, 0, 0.5]

    def test_empty_default(self):
        out = sentiment_features([])
        assert out.tolist() == [0.2] * 5 + [0.0] * 5

    @given(
        st.lists(
            st.lists(st.floats(0.01, 1.0), min_size=5, max_size=5).map(
                lambda v: np.array(v) / np.sum(v)
            ),
            min_size=1,
            max_size=6,
        )
    )
    def test_mean_is_distribution(self, sentences):
        out = sentiment_features(sentences)
        assert all(0.0 <= v <= 1.0 for v in out[:5])
        assert math.isclose(float(out[:5].sum()), 1.0, abs_tol=1e-9)


class TestBuiltinSentiment:
    POS = {"good", "great"}
    NEG = {"bad", "awful"}

    def test_neutral(self):
        out = builtin_sentence_sentiment([], self.POS, self.NEG)
        assert out.tolist() == [0, 0, 1, 0, 0]

    def test_one_positive(self):
        out = builtin_sentence_sentiment(["good"], self.POS, self.NEG)
        assert np.allclose(out, [0, 0, 0.5, 0.35, 0.15])

    def test_balanced(self):
        out = builtin_sentence_sentiment(["good", "bad"], self.POS, self.NEG)
        assert np.allclose(out, [0.1, 0.7 / 3, 1 / 3, 0.7 / 3, 0.1])
        assert out.sum() == pytest.approx(1.0, abs=1e-12)

    @given(st.lists(st.sampled_from(["good", "bad", "meh", "great", "awful"]), max_size=20))
    def test_always_a_distribution(self, tokens):
        out = builtin_sentence_sentiment(tokens, self.POS, self.NEG)
        assert (out >= 0).all()
        assert out.sum() == pytest.approx(1.0, abs=1e-9)

    def test_split_is_configurable(self):
        out = builtin_sentence_sentiment(["good"], self.POS, self.NEG, intensity_split=0.5)
        assert np.allclose(out, [0, 0, 0.5, 0.25, 0.25])


class TestSentenceSplitting:
    def test_split_on_terminators(self):
        assert split_sentences("one. two! three?") == ["one", "two", "three"]

    def test_newlines_split(self):
        assert split_sentences("a\nb") == ["a", "b"]

    def test_empty_segments_dropped(self):
        assert split_sentences("..!?") == []


class TestSidecar:
    def test_round_trip(self, tmp_path):
        path = write_lines(
            tmp_path / "side.tsv",
            ["d1\t0\t0 0 1 0 0", "d1\t1\t0.5 0.5 0 0 0"],
        )
        table = load_sentiment_sidecar(path)
        provider = SidecarSentimentProvider(table)
        doc = Document(id="d1", text="hello. bye.")
        out = provider.document_features(doc)
        assert out[:5].tolist() == [0.25, 0.25, 0.5, 0, 0]

    def test_missing_row_is_an_error(self, tmp_path):
        path = write_lines(tmp_path / "side.tsv", ["d1\t0\t0 0 1 0 0"])
        provider = SidecarSentimentProvider(load_sentiment_sidecar(path))
        with pytest.raises(DataError, match="sentence 1"):
            provider.document_features(Document(id="d1", text="a. b."))

    def test_invalid_distribution_rejected(self, tmp_path):
        path = write_lines(tmp_path / "side.tsv", ["d1\t0\t0.9 0.9 0 0 0"])
        with pytest.raises(ResourceError, match="summing to 1"):
            load_sentiment_sidecar(path)


class TestLiwc:
    def test_category_counts(self):
        lex = CategoryLexicon([("self", ["i", "me", "my"]), ("negemo", ["hate", "hat*"])])
        out = liwc_features(["i", "hate", "this"], lex)
        assert np.allclose(out, [1 / 3, 1 / 3])

    def test_empty_tokens(self):
        lex = CategoryLexicon([("self", ["i"])])
        assert liwc_features([], lex).tolist() == [0.0]

    def test_token_counts_once_per_category(self):
        lex = CategoryLexicon([("negemo", ["hate", "hat*"])])
        assert liwc_features(["hate"], lex).tolist() == [1.0]

    def test_prefix_wildcard(self):
        lex = CategoryLexicon([("ador", ["ador*"])])
        assert liwc_features(["adorable", "adored", "bored"], lex)[0] == pytest.approx(2 / 3)

    def test_file_order_preserved(self, tmp_path):
        path = write_lines(tmp_path / "liwc.tsv", ["zeta\tz*", "alpha\ta*"])
        lex = load_category_lexicon(path)
        assert [name for name, _p in lex.categories] == ["zeta", "alpha"]

    @given(st.lists(st.sampled_from(["i", "hate", "x", "hatred"]), max_size=12))
    def test_values_in_unit_interval_and_duplication_invariant(self, tokens):
        lex = CategoryLexicon([("self", ["i"]), ("negemo", ["hate", "hat*"])])
        out = liwc_features(tokens, lex)
        assert ((out >= 0) & (out <= 1)).all()
        assert np.allclose(liwc_features(tokens + tokens, lex), out)


class TestGender:
    def test_no_matches_neutral(self):
        lex = WeightedLexicon(weights={}, intercept=0.0)
        out = gender_features(["x"], lex)
        assert out.tolist() == [0.5, 0.0]  # exact 0.5 resolves to 0

    def test_ln3_gives_three_quarters(self):
        lex = WeightedLexicon(weights={"she": math.log(3)}, intercept=0.0)
        out = gender_features(["she"], lex)
        assert out[0] == pytest.approx(0.75)
        assert out[1] == 1.0

    def test_saturated_negative(self):
        lex = WeightedLexicon(weights={}, intercept=-1000.0)
        out = gender_features([], lex)
        assert out[0] == pytest.approx(0.0, abs=1e-12)
        assert out[1] == 0.0

    def test_counts_multiply_weights(self):
        lex = WeightedLexicon(weights={"a": 0.5}, intercept=0.0)
        single = gender_features(["a"], lex)[0]
        double = gender_features(["a", "a"], lex)[0]
        assert double > single

    @given(st.floats(min_value=0.1, max_value=5.0))
    def test_probability_increases_with_weight(self, delta):
        base = WeightedLexicon(weights={"w": 1.0}, intercept=-0.3)
        bumped = WeightedLexicon(weights={"w": 1.0 + delta}, intercept=-0.3)
        assert gender_features(["w"], bumped)[0] > gender_features(["w"], base)[0]

    def test_load_weighted_lexicon(self, tmp_path):
        path = write_lines(tmp_path / "g.tsv", ["_intercept\t-0.06", "she\t2.5", "he\t-1.0"])
        lex = load_weighted_lexicon(path)
        assert lex.intercept == -0.06
        assert lex.weights == {"she": 2.5, "he": -1.0}


class TestWordSets:
    def test_load_skips_comments(self, tmp_path):
        path = write_lines(tmp_path / "pos.txt", ["# header", "good", "", "Great"])
        assert load_word_set(path) == {"good", "great"}


class TestBuiltinProvider:
    def test_document_features(self):
        provider = BuiltinSentimentProvider({"good"}, {"bad"})
        doc = Document(id="d", text="good day. bad day.")
        out = provider.document_features(doc)
        # sentence 1: p=1 -> (0,0,.5,.35,.15); sentence 2: q=1 mirrored
        assert out[:5] == pytest.approx([0.075, 0.175, 0.5, 0.175, 0.075])
