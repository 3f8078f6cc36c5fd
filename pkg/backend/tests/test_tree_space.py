# tests/test_tree_space.py - Unit tests for simplicial trees, fixedness and vertex distances

from fractions import Fraction

import pytest

from upg_kolchin.core.automorphisms.automorphism import Automorphism
from upg_kolchin.core.graphs.marked_graph import rose
from upg_kolchin.core.trees.free_factor import FreeFactorSystem
from upg_kolchin.core.trees.tree_space import (SimplicialTree, collapse_to_one_orbit,
                                               complete_basis, elliptic_system, free_rose_tree,
                                               is_basis, is_fixed_by, is_nielsen_pair,
                                               length_witness, lengths_agree,
                                               min_vertex_distance, rescale, tree_from_system,
                                               with_lengths)
from upg_kolchin.core.words.subgroup_core import fold
from upg_kolchin.core.words.word_core import Basis, Word
from upg_kolchin.utils.error_handler import (ConjugatorMissing, FewerThanTwoVertexGroups,
                                             InputValidationError, RealizationFailed)

W = Basis.standard(3).parse


@pytest.mark.unit
class TestTranslationLength:

    def test_collapsed_petal(self, t0):
        assert t0.translation_length(W("a")) == 0
        assert t0.translation_length(W("b")) == 1
        assert t0.translation_length(W("c")) == 2
        assert t0.is_elliptic(W("aaA"))
        assert t0.covolume() == 2

    def test_conjugation_invariant(self, t0):
        w = W("cab")
        for g in [W("a"), W("cB"), W("bca")]:
            assert t0.translation_length(w.conjugate(g)) == t0.translation_length(w)

    def test_degenerate_tree_rejected(self):
        with pytest.raises(InputValidationError):
            SimplicialTree(rose(2), frozenset({1, 2}))
        with pytest.raises(InputValidationError):
            SimplicialTree(rose(2), frozenset({7}))

    def test_quotient(self, t0):
        q = t0.quotient
        assert len(q.vertices) == 1
        assert q.vertices[0].generators == (W("a"),)
        assert [(qe.edge, qe.word) for qe in q.edges] == [(2, W("b")), (3, W("bc"))]

    def test_to_dict(self, t0):
        data = t0.to_dict()
        assert data['collapsed'] == [1]
        assert data['covolume'] == "2"
        assert data['quotient']['vertices'][0]['group'] == ["a"]


@pytest.mark.unit
class TestFixedness:

    def test_loop_fixed_by_h(self, loop_b_tree, h):
        result = is_fixed_by(loop_b_tree, h)
        assert result
        assert result.conjugators == {0: Word()}

    def test_free_tree_moved(self, h):
        result = is_fixed_by(free_rose_tree(2), h)
        assert not result
        assert result.witness is not None

    def test_free_tree_fixed_by_inner(self):
        assert is_fixed_by(free_rose_tree(2), Automorphism.inner(2, W("ab")))

    def test_length_witness(self, t0, h1):
        w = length_witness(t0, h1, 3)
        assert w is not None
        assert t0.translation_length(h1(w)) != t0.translation_length(w)
        assert not is_fixed_by(t0, h1)

    def test_lengths_agree(self, loop_b_tree, h):
        assert lengths_agree(loop_b_tree, h, [W("a"), W("b"), W("abAB")])
        assert length_witness(loop_b_tree, h, 3) is None


@pytest.mark.unit
class TestVertexDistance:

    def test_single_loop(self, loop_b_tree):
        found = min_vertex_distance(loop_b_tree)
        assert found.distance == 1
        assert (0, 0, (2,)) in found.pairs

    def test_weighted(self, t0):
        T = with_lengths(t0, {2: Fraction(3), 3: Fraction(1, 2)})
        assert min_vertex_distance(T).distance == Fraction(1, 2)

    def test_free_tree_has_no_vertex_groups(self):
        with pytest.raises(FewerThanTwoVertexGroups):
            min_vertex_distance(free_rose_tree(2))


@pytest.mark.unit
class TestNielsenPairs:

    def test_translates_along_fixed_loop(self, h):
        """⟨a⟩ and b⟨a⟩B are both carried by h with the same conjugator"""
        result = is_nielsen_pair(fold([W("a")]), fold([W("baB")]), [h])
        assert result
        assert result.conjugators == (Word(),)

    def test_different_conjugators(self):
        phi = Automorphism.parse(["a", "cbC", "c"], ["a", "Cbc", "c"])
        assert not is_nielsen_pair(fold([W("a")]), fold([W("b")]), [phi])

    def test_group_not_invariant(self, h):
        with pytest.raises(ConjugatorMissing):
            is_nielsen_pair(fold([W("a")]), fold([W("b")]), [h])


@pytest.mark.unit
class TestConstructions:

    def test_complete_basis(self):
        assert complete_basis([W("ab")], 2) == [W("ab"), W("a")]
        assert is_basis([W("ab"), W("b")], 2)
        assert not is_basis([W("a"), W("a")], 2)
        with pytest.raises(RealizationFailed):
            complete_basis([W("aa")], 2)

    def test_single_factor_tree(self):
        F = FreeFactorSystem.parse(2, [["a"]])
        T = tree_from_system(F)
        assert T.is_elliptic(W("a"))
        assert T.translation_length(W("b")) == 1
        assert elliptic_system(T).same_as(F)

    def test_two_factor_tree(self):
        F = FreeFactorSystem.parse(3, [["a"], ["b"]])
        T = tree_from_system(F)
        assert T.is_elliptic(W("a")) and T.is_elliptic(W("b"))
        assert not T.is_elliptic(W("ab"))
        assert not T.is_elliptic(W("c"))
        assert elliptic_system(T).same_as(F)
        assert len(T.quotient.nontrivial()) == 2

    def test_collapse_to_one_orbit(self, t0):
        T = collapse_to_one_orbit(t0)
        assert T.collapsed == frozenset({1, 2})
        assert T.translation_length(W("b")) == 0
        assert T.translation_length(W("c")) == 1

    def test_rescale(self, t0):
        assert rescale(t0, Fraction(1, 2)).translation_length(W("c")) == 1
        with pytest.raises(InputValidationError):
            rescale(t0, 0)

    def test_with_lengths(self, t0):
        assert with_lengths(t0, {3: 5}).translation_length(W("c")) == 6
