from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sqrect.errors import PrefixTooShort, WindowTooShort
from sqrect.exactnum import make_surd
from sqrect.pet import Param
from sqrect.words import (
    Substitution,
    Word,
    complexity,
    compose,
    letter_frequency,
    limit_word,
    tower_stats,
)

SQRT2M1 = make_surd(-1, 1, 1, 2)
SQRT3M1 = make_surd(-1, 1, 1, 3)

words = st.text(alphabet="ab", max_size=30).map(Word)
substitutions = st.builds(
    Substitution,
    st.text(alphabet="ab", min_size=1, max_size=6).map(Word),
    st.text(alphabet="ab", min_size=1, max_size=6).map(Word),
)


class TestWord:
    def test_alphabet_enforced(self):
        with pytest.raises(ValueError):
            Word("abc")

    def test_counts(self):
        assert Word("aabab").counts() == (3, 2)

    def test_concat_and_power(self):
        assert Word("ab") + Word("ba") == Word("abba")
        assert Word("ab") * 3 == Word("ababab")

    def test_rotate(self):
        assert Word("abb").rotate(1) == Word("bba")
        assert Word("abb").rotate(3) == Word("abb")

    def test_slice_is_word(self):
        w = Word("abab")[1:3]
        assert isinstance(w, Word) and w == Word("ba")


class TestSubstitution:
    def test_empty_image_rejected(self):
        with pytest.raises(ValueError):
            Substitution(Word(""), Word("a"))

    @given(substitutions, substitutions, words)
    def test_compose_is_application_order(self, s1, s2, w):
        assert compose(s1, s2)(w) == s1(s2(w))

    @given(substitutions, substitutions)
    def test_abelianization_multiplicative(self, s1, s2):
        a11, a12, a21, a22 = s1.abelianization()
        b11, b12, b21, b22 = s2.abelianization()
        product = (
            a11 * b11 + a12 * b21,
            a11 * b12 + a12 * b22,
            a21 * b11 + a22 * b21,
            a21 * b12 + a22 * b22,
        )
        assert compose(s1, s2).abelianization() == product

    @given(substitutions, words)
    def test_abelianization_counts_letters(self, s, w):
        m11, m12, m21, m22 = s.abelianization()
        na, nb = w.counts()
        assert s(w).counts() == (m11 * na + m12 * nb, m21 * na + m22 * nb)


class TestComplexity:
    def test_needs_long_window(self):
        with pytest.raises(WindowTooShort):
            complexity(Word("ab" * 3), 2)

    def test_periodic_word(self):
        assert complexity(Word("a" * 500), 4) == 1
        assert complexity(Word("ab" * 500), 4) == 2

    @pytest.mark.parametrize(
        "theta,eps",
        [
            (SQRT2M1, -1),
            (SQRT3M1, 1),
            (make_surd(-2, 1, 1, 5), -1),
            (make_surd(-1, 1, 2, 3), -1),
            (make_surd(-3, 1, 1, 10), -1),
        ],
    )
    def test_limit_words_are_sturmian(self, theta, eps):
        w = limit_word(Param(theta, eps), 2000)
        for n in (1, 2, 3, 5, 10, 25, 50):
            assert complexity(w, n) == n + 1


class TestLimitWord:
    def test_prefix_stability(self):
        p = Param(SQRT2M1, -1)
        w1 = limit_word(p, 120)
        w2 = limit_word(p, 600)
        assert str(w2).startswith(str(w1))

    def test_requested_length(self):
        assert len(limit_word(Param(SQRT2M1, -1), 333)) == 333

    def test_silver_mean_prefix(self):
        # fixed substitution a -> abaab, b -> aab applied to a
        w = limit_word(Param(SQRT2M1, -1), 25)
        s = Substitution(Word("abaab"), Word("aab"))
        expanded = Word("a")
        for _ in range(4):
            expanded = s(expanded)
        assert str(expanded)[:25] == str(w)


class TestTowerStats:
    def test_block_identity_is_exact(self):
        ts = tower_stats(Param(SQRT2M1, -1), 4, 400_000)
        assert ts.N == ts.N_a + ts.N_b
        assert ts.N_a * ts.alpha + ts.N_b * ts.beta == pytest.approx(
            1.0, abs=1e-12
        )

    def test_matches_matrix_columns(self):
        from sqrect.lyap import cocycle_product

        p = Param(SQRT2M1, -1)
        ts = tower_stats(p, 3, 100_000)
        M, _ = cocycle_product(p, 3)
        assert (ts.N_a, ts.N_b) == (M.m11 + M.m21, M.m12 + M.m22)

    def test_prefix_too_short(self):
        with pytest.raises(PrefixTooShort):
            tower_stats(Param(SQRT2M1, -1), 6, 2_000)

    def test_measures_positive(self):
        ts = tower_stats(Param(SQRT3M1, 1), 3, 300_000)
        assert ts.alpha > 0 and ts.beta > 0


class TestLetterFrequency:
    def test_matches_empirical_frequency(self):
        p = Param(SQRT2M1, -1)
        w = limit_word(p, 50_000)
        na, nb = w.counts()
        assert letter_frequency(p, 30) == pytest.approx(na / len(w), abs=1e-3)

    def test_between_half_and_one(self):
        for th, eps in ((SQRT2M1, -1), (SQRT3M1, 1)):
            f = letter_frequency(Param(th, eps), 25)
            assert 0.5 < f < 1
