# tests/test_free_factor.py - Unit tests for free factor systems and supports

import random

import pytest

from upg_kolchin.core.automorphisms.automorphism import Automorphism
from upg_kolchin.core.trees.free_factor import (ComplexitySeq, FreeFactorSystem,
                                                complexity_chain_bound, free_factor_support,
                                                invariant_closure, is_invariant, meet,
                                                whitehead_automorphism, whitehead_moves,
                                                whitehead_reduce)
from upg_kolchin.core.words.word_core import Basis, CyclicWord, Word
from upg_kolchin.utils.error_handler import (InvarianceViolation, SupportIsWholeGroup,
                                             SupportSearchExhausted)

W = Basis.standard(3).parse


def classes(*texts):
    return [CyclicWord.of(W(t)) for t in texts]


@pytest.mark.unit
class TestComplexity:

    def test_sorted_nonincreasing(self):
        assert ComplexitySeq.of([1, 2, 0]).ranks == (2, 1)

    def test_lexicographic_order(self):
        assert ComplexitySeq.of([1]) < ComplexitySeq.of([2])
        assert ComplexitySeq.of([2]) < ComplexitySeq.of([2, 1])
        assert ComplexitySeq.of([1, 1, 1]) < ComplexitySeq.of([2])

    def test_proper(self):
        assert ComplexitySeq.of([1, 1]).is_proper(2)
        assert not ComplexitySeq.of([2]).is_proper(2)

    def test_chain_bound(self):
        assert complexity_chain_bound(2) == 4
        assert complexity_chain_bound(3) == 7


@pytest.mark.unit
class TestFreeFactorSystem:

    def test_parse_orders_by_rank(self):
        F = FreeFactorSystem.parse(3, [["a"], ["b", "c"]])
        assert F.to_dict() == {'factors': [['b', 'c'], ['a']], 'complexity': [2, 1]}

    def test_conjugate_factors_collapse(self):
        F = FreeFactorSystem.parse(2, [["a"], ["baB"]])
        assert len(F.factors) == 1
        assert F.same_as(FreeFactorSystem.parse(2, [["baB"]]))

    def test_carries(self):
        F = FreeFactorSystem.parse(3, [["a"], ["b", "c"]])
        assert F.carries(W("bcB"))
        assert F.carries(W(""))
        assert not F.carries(W("ab"))
        assert F.carries_all([W("a"), W("cbC")])
        assert not F.carries_all([W("a"), W("ac")])

    def test_trivial_and_whole(self):
        assert FreeFactorSystem.trivial(2).is_trivial()
        assert FreeFactorSystem.parse(2, [["a", "b"]]).is_whole_group()
        assert FreeFactorSystem.trivial(2).format() == "{}"

    def test_meet(self):
        F = FreeFactorSystem.parse(3, [["a", "b"]])
        G = FreeFactorSystem.parse(3, [["b", "c"]])
        assert meet(F, G).same_as(FreeFactorSystem.parse(3, [["b"]]))

    def test_meet_keeps_nonempty_intersections(self):
        F = FreeFactorSystem.parse(3, [["a", "b"]])
        G = FreeFactorSystem.parse(3, [["a"], ["c"]])
        assert meet(F, G).same_as(FreeFactorSystem.parse(3, [["a"]]))
        assert meet(F, F).same_as(F)

    def test_meet_with_conjugate_factor(self):
        F = FreeFactorSystem.parse(3, [["a", "b"]])
        G = FreeFactorSystem.parse(3, [["cbC"]])
        assert meet(F, G).same_as(FreeFactorSystem.parse(3, [["b"]]))


@pytest.mark.unit
class TestInvariance:

    def test_invariant_factor(self, h):
        result = is_invariant(FreeFactorSystem.parse(2, [["a"]]), h)
        assert result
        assert result.permutation == (0,)

    def test_moved_factor(self, h):
        assert not is_invariant(FreeFactorSystem.parse(2, [["b"]]), h)

    def test_permuted_factors(self):
        swap = Automorphism.parse(["b", "a"], ["b", "a"])
        F = FreeFactorSystem.parse(2, [["a"], ["b"]])
        assert is_invariant(F, swap).permutation == (1, 0)
        with pytest.raises(InvarianceViolation):
            is_invariant(F, swap, upg=True)


@pytest.mark.unit
class TestWhitehead:

    def test_whitehead_automorphism(self, h):
        phi = whitehead_automorphism((1, 2), 1, 2)
        assert phi.images == h.images
        assert phi.compose(phi.inverse()).is_identity()
        Automorphism.validate(phi.images, phi.inverse_images)

    def test_moves_are_automorphisms(self):
        for move in whitehead_moves(2):
            phi = move.automorphism(2)
            Automorphism.validate(phi.images, phi.inverse_images)

    def test_move_count(self):
        assert len(whitehead_moves(2)) == 12

    def test_reduce(self):
        ws = classes("baaa")
        reduced, psi = whitehead_reduce(ws, 2)
        assert sum(len(w) for w in reduced) == 1
        assert tuple(psi.apply_to_class(w) for w in ws) == reduced


@pytest.mark.unit
class TestSupport:

    def test_primitive_class(self):
        F = free_factor_support(classes("ab"), 2)
        assert F.complexity() == ComplexitySeq((1,))
        assert F.carries(W("ab"))

    def test_two_generators(self):
        F = free_factor_support(classes("a", "b"), 3)
        assert F.complexity() == ComplexitySeq((1, 1))

    def test_commutator_fills(self):
        with pytest.raises(SupportIsWholeGroup):
            free_factor_support(classes("abAB"), 2)

    def test_exhausted_search(self):
        with pytest.raises(SupportSearchExhausted):
            free_factor_support(classes("abAB"), 2, depth=0)

    def test_empty_input(self):
        assert free_factor_support([], 3).is_trivial()

    def test_invariant_closure_is_immediate(self, h):
        F = invariant_closure([W("a")], h)
        assert F.same_as(FreeFactorSystem.parse(2, [["a"]]))

    def test_invariant_closure_grows(self, staircase):
        """b ↦ ba forces a and b into one factor"""
        F = invariant_closure([W("b")], staircase)
        assert F.same_as(FreeFactorSystem.parse(3, [["a", "b"]]))
        assert is_invariant(F, staircase)


def random_visible_system(rng: random.Random, moves) -> FreeFactorSystem:
    """Factors spanned by disjoint blocks of a random basis of F_3"""
    phi = Automorphism.identity(3)
    for _ in range(rng.randint(0, 3)):
        phi = phi.compose(rng.choice(moves).automorphism(3))
    basis = [phi(Word((i,))) for i in (1, 2, 3)]
    rng.shuffle(basis)
    cuts = sorted(rng.sample((1, 2), rng.randint(0, 2)))
    blocks = [basis[i:j] for i, j in zip([0] + cuts, cuts + [3])]
    return FreeFactorSystem.from_words(3, [b for b in blocks if rng.random() < 0.7])


@pytest.mark.property
class TestMeetProperties:

    def test_meet_is_below_both(self):
        rng = random.Random(808)
        moves = whitehead_moves(3)
        for _ in range(50):
            F = random_visible_system(rng, moves)
            G = random_visible_system(rng, moves)
            M = meet(F, G)
            assert M.complexity() <= min(F.complexity(), G.complexity())
            for H in M.factors:
                assert F.carries_all(H.basis())
                assert G.carries_all(H.basis())
