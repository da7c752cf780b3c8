import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from certlab import fuzzymatch as fm

import oracles

short_text = st.text(alphabet="abcde 0.", max_size=12)
words_text = st.text(alphabet="abc 12.", max_size=20)


class TestIndelDistance:
    def test_identity(self):
        assert fm.indel_distance("abc", "abc") == 0
        assert fm.indel_similarity("abc", "abc") == 100.0

    def test_single_substitution_costs_two(self):
        # computed by the insert/delete DP oracle
        assert oracles.indel_distance_dp("abc", "abd") == 2
        assert fm.indel_distance("abc", "abd") == 2
        assert fm.indel_similarity("abc", "abd") == 66.67

    def test_empty_vs_nonempty(self):
        assert fm.indel_distance("", "xyz") == 3
        assert fm.indel_similarity("", "xyz") == 0.0

    def test_both_empty(self):
        assert fm.indel_distance("", "") == 0
        assert fm.indel_similarity("", "") == 100.0

    @given(short_text, short_text)
    def test_equals_dp_oracle(self, a, b):
        assert fm.indel_distance(a, b) == oracles.indel_distance_dp(a, b)

    @given(short_text, short_text, short_text)
    def test_metric_laws(self, a, b, c):
        dab = fm.indel_distance(a, b)
        assert dab == fm.indel_distance(b, a)
        assert (dab == 0) == (a == b)
        assert dab <= fm.indel_distance(a, c) + fm.indel_distance(c, b)


class TestPartialRatios:
    def test_word_permutation_gives_100(self):
        assert fm.partial_token_sort_ratio("ACME Firewall 2.0", "Firewall 2.0 ACME") == 100.0

    def test_shorter_sorted_contiguous_in_longer(self):
        assert fm.partial_token_sort_ratio("2.0 ACME", "platform ACME 2.0 build") == 100.0

    def test_empty_against_nonempty_is_zero(self):
        assert fm.partial_token_sort_ratio("", "anything") == 0.0
        assert fm.partial_ratio("", "anything") == 0.0

    def test_token_set_duplicates_collapse(self):
        assert fm.partial_token_set_ratio("ACME ACME secure", "secure ACME") == 100.0

    def test_token_set_disjoint_equals_plain_alignment(self):
        expected = oracles.rounded(oracles.best_alignment_fraction("alpha", "beta"))
        assert fm.partial_token_set_ratio("alpha", "beta") == expected

    def test_token_set_both_empty(self):
        assert fm.partial_token_set_ratio("", "") == 100.0

    @given(words_text, words_text)
    def test_sort_ratio_equals_oracle(self, a, b):
        assert fm.partial_token_sort_ratio(a, b) == oracles.partial_token_sort_oracle(a, b)

    @given(words_text, words_text)
    def test_set_ratio_equals_oracle(self, a, b):
        assert fm.partial_token_set_ratio(a, b) == oracles.partial_token_set_oracle(a, b)

    def test_sort_ratio_invariant_under_permutation(self):
        rng = random.Random(7)
        words = ["alpha", "beta", "2.0", "gamma", "x"]
        base = fm.partial_token_sort_ratio(" ".join(words), "alpha beta gamma delta")
        for _ in range(50):
            shuffled = words[:]
            rng.shuffle(shuffled)
            assert fm.partial_token_sort_ratio(" ".join(shuffled), "alpha beta gamma delta") == base


class TestCombinedSimilarity:
    def test_equal_strings(self):
        assert fm.combined_similarity("secure chip", "secure chip") == 100.0

    @given(words_text, words_text)
    def test_is_max_of_components(self, a, b):
        combined = fm.combined_similarity(a, b)
        assert combined >= fm.partial_token_sort_ratio(a, b)
        assert combined >= fm.partial_token_set_ratio(a, b)
        assert combined in (fm.partial_token_sort_ratio(a, b), fm.partial_token_set_ratio(a, b))

    def test_fixture_pair_equals_hand_computed_max(self):
        a, b = "crypto library 5.1", "acme crypto suite 5.1"
        expected = max(oracles.partial_token_sort_oracle(a, b), oracles.partial_token_set_oracle(a, b))
        assert fm.combined_similarity(a, b) == expected

    @given(words_text, words_text)
    def test_scores_within_range(self, a, b):
        assert 0.0 <= fm.combined_similarity(a, b) <= 100.0

    @given(st.text(alphabet="abc1. ", min_size=1, max_size=15))
    def test_self_similarity_is_100(self, a):
        assert fm.combined_similarity(a, a) == 100.0


class TestLemmatizeTitle:
    def test_version_tokens_keep_dots(self):
        assert fm.lemmatize_title("Crypto Libraries V5.1.2").tokens == ("crypto", "library", "v5.1.2")

    def test_empty(self):
        assert fm.lemmatize_title("").tokens == ()

    @pytest.mark.parametrize(
        "word,base",
        [("Devices", "device"), ("Modules", "module"), ("libraries", "library"),
         ("librarires", "library"), ("cards", "card"), ("bus", "bus"), ("series", "series")],
    )
    def test_suffix_rules(self, word, base):
        assert fm.lemmatize_title(word).tokens == (base,)

    def test_punctuation_stripped(self):
        assert fm.lemmatize_title("ACME, Inc. (Firewall)").tokens == ("acme", "inc", "firewall")

    def test_joined_property(self):
        title = fm.lemmatize_title("Smart Cards v2.1")
        assert title.joined == " ".join(title.tokens)
        assert all(" " not in t for t in title.tokens)
