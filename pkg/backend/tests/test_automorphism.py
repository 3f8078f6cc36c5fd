# tests/test_automorphism.py - Unit tests for certified automorphisms and their homology action

import random

import pytest
import sympy

from upg_kolchin.core.automorphisms.automorphism import (Automorphism, class_period,
                                                         inner_conjugator, is_inner,
                                                         is_outer_equal, periodic_classes)
from upg_kolchin.core.automorphisms.unipotent_linalg import (fixed_lattice, is_unipotent,
                                                             is_unitriangular,
                                                             primitive_integer_vector,
                                                             trivial_mod3, unipotent_basis)
from upg_kolchin.core.words.word_core import Basis, CyclicWord, enumerate_cyclic_words
from upg_kolchin.utils.error_handler import (CompositionNotIdentity, InputValidationError,
                                             NotUnipotent)

W = Basis.standard(3).parse


@pytest.fixture
def swap():
    """a ↦ b, b ↦ a"""
    return Automorphism.parse(["b", "a"], ["b", "a"])


@pytest.mark.unit
class TestValidation:

    def test_valid_pair(self, h):
        assert h.rank == 2
        assert h(W("b")) == W("ba")
        assert h.apply_inverse(W("b")) == W("bA")

    def test_wrong_inverse_rejected(self):
        with pytest.raises(CompositionNotIdentity):
            Automorphism.parse(["a", "ba"], ["a", "ba"])

    def test_non_surjective_rejected(self):
        """a ↦ a², b ↦ b has no inverse"""
        with pytest.raises(CompositionNotIdentity):
            Automorphism.parse(["aa", "b"], ["a", "b"])

    def test_count_mismatch_rejected(self):
        with pytest.raises(InputValidationError):
            Automorphism.validate([W("a"), W("b")], [W("a")])

    def test_generator_outside_rank_rejected(self):
        with pytest.raises(InputValidationError):
            Automorphism.validate([W("a"), W("c")], [W("a"), W("b")])

    def test_to_dict(self, h):
        assert h.to_dict() == {'rank': 2, 'images': ['a', 'ba'], 'inverse_images': ['a', 'bA']}
        assert h.format() == "a↦a, b↦ba"


@pytest.mark.unit
class TestAlgebra:

    def test_compose(self, h):
        assert h.compose(h)(W("b")) == W("baa")

    def test_power(self, h):
        assert h.power(3)(W("b")) == W("baaa")
        assert h.power(-1)(W("b")) == W("bA")
        assert h.power(0).is_identity()

    def test_inverse_cancels(self, staircase):
        assert staircase.compose(staircase.inverse()).is_identity()
        assert staircase.inverse().compose(staircase).is_identity()

    def test_apply_to_class(self, h):
        c = CyclicWord.of(W("ab"))
        assert h.apply_to_class(c) == CyclicWord.of(W("aba"))

    def test_inner_round_trip(self):
        for gamma in [W("b"), W("ab"), W("aab"), W("Bc"), W("ca")]:
            theta = Automorphism.inner(3, gamma)
            assert inner_conjugator(theta) == gamma

    def test_inner_conjugates_basis(self):
        theta = Automorphism.inner(2, W("b"))
        assert theta(W("a")) == W("baB")
        assert theta(W("b")) == W("b")
        assert is_inner(theta)

    def test_not_inner(self, h, swap):
        assert not is_inner(h)
        assert not is_inner(swap)
        assert is_inner(Automorphism.identity(3))

    def test_outer_equality(self, h):
        twisted = h.compose(Automorphism.inner(2, W("ab")))
        assert is_outer_equal(h, twisted)
        assert not is_outer_equal(h, h.power(2))

    def test_class_period(self, h, swap):
        assert class_period(h, CyclicWord.of(W("a")), 5) == 1
        assert class_period(h, CyclicWord.of(W("b")), 5) is None
        assert class_period(swap, CyclicWord.of(W("a")), 5) == 2
        assert class_period(swap, CyclicWord.of(W("ab")), 5) == 1

    def test_periodic_classes(self, h):
        classes = [CyclicWord.of(W(t)) for t in ("a", "b", "bab")]
        assert set(periodic_classes(h, classes, 4)) == {CyclicWord.of(W("a"))}


@pytest.mark.unit
class TestHomology:

    def test_abelianization_columns(self, h):
        assert h.abelianization() == sympy.Matrix([[1, 1], [0, 1]])

    def test_staircase_is_unitriangular(self, staircase):
        M = staircase.abelianization()
        assert M == sympy.Matrix([[1, 1, 0], [0, 1, 1], [0, 0, 1]])
        assert is_unipotent(M)
        assert is_unitriangular(M)

    def test_swap_is_not_unipotent(self, swap):
        M = swap.abelianization()
        assert not is_unipotent(M)
        with pytest.raises(NotUnipotent):
            unipotent_basis(M)

    def test_trivial_mod3(self, h):
        assert trivial_mod3(sympy.eye(2))
        assert trivial_mod3(sympy.Matrix([[1, 3], [0, 1]]))
        assert not trivial_mod3(h.abelianization())

    def test_fixed_lattice(self, h):
        assert fixed_lattice(h.abelianization()) == [sympy.Matrix([1, 0])]
        assert len(fixed_lattice(sympy.eye(3))) == 3

    def test_primitive_integer_vector(self):
        v = sympy.Matrix([sympy.Rational(-2, 3), sympy.Rational(4, 3)])
        assert primitive_integer_vector(v) == sympy.Matrix([1, -2])
        with pytest.raises(InputValidationError):
            primitive_integer_vector(sympy.zeros(2, 1))

    @pytest.mark.parametrize("matrix", [
        [[1, 0], [1, 1]],
        [[1, 0, 0], [2, 1, 0], [1, 3, 1]],
        [[3, -4], [1, -1]],
    ])
    def test_unipotent_basis_triangularizes(self, matrix):
        M = sympy.Matrix(matrix)
        P = unipotent_basis(M)
        assert abs(P.det()) == 1
        assert is_unitriangular(P.inv() * M * P)

    def test_non_square_rejected(self):
        with pytest.raises(InputValidationError):
            is_unipotent(sympy.Matrix([[1, 0, 0], [0, 1, 0]]))


def random_unimodular(rng: random.Random, n: int) -> sympy.Matrix:
    P = sympy.eye(n)
    for _ in range(rng.randint(1, 6)):
        i, j = rng.sample(range(n), 2)
        move = rng.choice(("add", "swap", "negate"))
        if move == "add":
            P[j, :] = P[j, :] + rng.choice((-2, -1, 1, 2)) * P[i, :]
        elif move == "swap":
            P.row_swap(i, j)
        else:
            P[i, :] = -P[i, :]
    return P


def random_unitriangular(rng: random.Random, n: int, step: int = 1) -> sympy.Matrix:
    U = sympy.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            U[i, j] = step * rng.randint(-3, 3)
    return U


@pytest.mark.property
class TestUnipotenceProperties:

    def test_eigenvalue_and_triangular_definitions_agree(self):
        rng = random.Random(3101)
        for _ in range(200):
            n = rng.choice((2, 3))
            U = random_unitriangular(rng, n)
            spoil = rng.random() < 0.5
            if spoil:
                U[n - 1, n - 1] = -1
            P = random_unimodular(rng, n)
            M = P * U * P.inv()
            assert is_unipotent(M) is not spoil
            if spoil:
                with pytest.raises(NotUnipotent):
                    unipotent_basis(M)
                continue
            Q = unipotent_basis(M)
            assert abs(Q.det()) == 1
            assert is_unitriangular(Q.inv() * M * Q)

    def test_periodic_vectors_are_fixed(self):
        rng = random.Random(3102)
        for _ in range(50):
            n = rng.choice((2, 3))
            P = random_unimodular(rng, n)
            M = P * random_unitriangular(rng, n) * P.inv()
            one = sympy.eye(n)
            assert (M ** 6 - one).rank() == (M - one).rank()

    def test_trivial_mod3_conjugates_are_unipotent(self):
        rng = random.Random(3103)
        for _ in range(50):
            n = rng.choice((2, 3))
            P = random_unimodular(rng, n)
            M = P * random_unitriangular(rng, n, step=3) * P.inv()
            assert trivial_mod3(M)
            assert is_unipotent(M)


@pytest.mark.property
class TestPeriodicClasses:

    def test_periodic_classes_are_fixed(self, h):
        """Every class of length at most 6 with period at most 6 is fixed"""
        classes = enumerate_cyclic_words(2, 6)
        periods = periodic_classes(h, classes, 6)
        assert CyclicWord.of(W("a")) in periods
        assert CyclicWord.of(W("b")) not in periods
        assert set(periods.values()) == {1}
