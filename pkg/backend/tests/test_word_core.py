# tests/test_word_core.py - Unit tests for reduced and cyclic words

import pytest

from upg_kolchin.core.words.word_core import (Basis, CyclicWord, Word, all_words_of_length,
                                              are_conjugate, concat, cyclic_length, cyclic_reduce,
                                              enumerate_cyclic_words, enumerate_words,
                                              free_reduce, invert, primitive_root,
                                              word_length)
from upg_kolchin.utils.error_handler import InputValidationError, UnknownGeneratorError

W = Basis.standard(3).parse


@pytest.mark.unit
class TestReduce:
    """Free reduction and parsing"""

    @pytest.mark.parametrize("raw, expected", [("abB", "a"), ("aA", ""), ("bAab", "bb")])
    def test_reduce_examples(self, raw, expected):
        """Parsing always returns the freely reduced word"""
        assert W(raw) == W(expected)
        assert W(raw).format(Basis.standard(3)) == expected

    def test_reduce_idempotent(self):
        """Reducing twice changes nothing"""
        for raw in all_words_of_length(2, 4):
            once = free_reduce(raw)
            assert free_reduce(once) == once

    def test_length_bounds(self):
        """||u|-|v|| ≤ |uv| ≤ |u|+|v| and u·u⁻¹ = ε"""
        words = list(enumerate_words(2, 3))
        for u in words:
            assert u * ~u == Word()
            for v in words[::7]:
                assert abs(len(u) - len(v)) <= len(u * v) <= len(u) + len(v)

    def test_unknown_generator(self):
        """Symbols outside the basis are rejected"""
        with pytest.raises(UnknownGeneratorError):
            Basis.standard(2).parse("abc")

    def test_empty_word_spellings(self):
        """The empty word reads as an empty string or 1"""
        assert Basis.standard(2).parse("") == Word()
        assert Basis.standard(2).parse("1") == Word()

    def test_basis_validation(self):
        """Generator names must be distinct lower-case letters"""
        with pytest.raises(InputValidationError):
            Basis(2, ("a", "a"))
        with pytest.raises(InputValidationError):
            Basis(0)

    def test_power_and_inverse(self):
        """Powers and inverses are reduced"""
        assert W("ab") ** 2 == W("abab")
        assert W("ab") ** -1 == W("BA")
        assert ~W("abC") == W("cBA")


@pytest.mark.unit
class TestCyclicReduce:
    """Cyclic reduction and conjugacy classes"""

    def test_conjugated_letter(self):
        """Aba = A·b·a"""
        c, conj = cyclic_reduce(W("Aba"))
        assert c.word() == W("b")
        assert conj == W("A")

    def test_already_cyclically_reduced(self):
        c, conj = cyclic_reduce(W("ab"))
        assert c.word() == W("ab")
        assert conj == Word()

    def test_commutator_matches_brute_force(self):
        """BAba is already cyclically reduced; no rotation is shorter"""
        w = W("BAba")
        c, conj = cyclic_reduce(w)
        assert conj * c.word() * ~conj == w
        shortest = min(len(r) for r in CyclicWord.of(w).rotations())
        assert len(c) == shortest == 4

    def test_identity_holds_after_reduction(self):
        """w = conj·c·conj⁻¹ for every short word"""
        for w in enumerate_words(2, 5):
            c, conj = cyclic_reduce(w)
            assert conj * c.word() * ~conj == w

    def test_conjugation_invariance(self):
        """cyclic_reduce(γwγ⁻¹) has the same class as cyclic_reduce(w)"""
        gammas = list(enumerate_words(3, 2))
        for w in list(enumerate_words(3, 3))[::5]:
            base = cyclic_reduce(w)[0]
            for g in gammas:
                assert cyclic_reduce(g * w * ~g)[0] == base

    def test_rotation_invariant_equality(self):
        """Classes compare by least rotation"""
        assert CyclicWord.of(W("abc")) == CyclicWord.of(W("cab"))
        assert hash(CyclicWord.of(W("abc"))) == hash(CyclicWord.of(W("bca")))
        assert CyclicWord.of(W("ab")) == CyclicWord.of(W("ba"))
        assert are_conjugate(W("ab"), W("ba"))
        assert CyclicWord.of(W("ab")) != CyclicWord.of(W("aB"))

    def test_cyclic_length(self):
        assert cyclic_length(W("Abba")) == 2
        assert cyclic_length(W("")) == 0

    def test_enumerate_cyclic_words(self):
        """Rank 1 classes of length ≤ 2 are a, A, aa, AA"""
        classes = enumerate_cyclic_words(1, 2)
        assert len(classes) == 4
        assert classes == sorted(classes)


@pytest.mark.unit
class TestPrimitiveRoot:

    def test_proper_power(self):
        assert primitive_root(W("abab")) == (W("ab"), 2)

    def test_conjugated_power(self):
        root, k = primitive_root(W("cababC"))
        assert k == 2
        assert root == W("cabC")

    def test_identity(self):
        assert primitive_root(Word()) == (Word(), 1)


@pytest.mark.unit
class TestPlumbing:

    def test_concat_reduces(self):
        assert concat(W("ab"), W("Bc"), W("C")) == W("a")
        assert concat() == Word()

    def test_invert(self):
        assert invert(W("abC")) == W("cBA")
        assert concat(W("abC"), invert(W("abC"))) == Word()

    def test_word_length(self):
        assert word_length(W("abBc")) == 2
        assert word_length(Word()) == 0
