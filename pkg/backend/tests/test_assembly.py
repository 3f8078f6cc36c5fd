# tests/test_assembly.py - Unit tests for representatives, restrictions and filtered graph assembly

from fractions import Fraction

import pytest

from upg_kolchin.config.settings import RunConfig
from upg_kolchin.core.automorphisms.automorphism import Automorphism, is_inner, is_outer_equal
from upg_kolchin.core.graphs.marked_graph import EdgePath, MarkedGraph, rose
from upg_kolchin.core.graphs.triangular_map import induced_automorphism
from upg_kolchin.core.kolchin.assembly import (assemble_filtered_graph, edge_bound,
                                               identity_map, lift_to_aut, restrict,
                                               rose_assembly, solvability_report)
from upg_kolchin.core.kolchin.representatives import (factor_words, find_triangular,
                                                      triangular_candidates, unipotent_forms)
from upg_kolchin.core.trees.free_factor import FreeFactorSystem
from upg_kolchin.core.trees.tree_space import SimplicialTree
from upg_kolchin.core.words.subgroup_core import fold
from upg_kolchin.core.words.word_core import Basis, Word
from upg_kolchin.utils.error_handler import RealizationFailed, RestrictionNotCertified

W = Basis.standard(3).parse


@pytest.fixture
def loop_c_tree():
    """Loop c at the vertex ⟨a, b⟩"""
    return SimplicialTree(rose(3), frozenset({1, 2}))


@pytest.fixture
def balloon_tree():
    """Vertex ⟨a, b⟩ joined by an arc to the vertex ⟨c⟩"""
    host = MarkedGraph(rank=3, vertices=(0, 1), edges={1: (0, 0), 2: (0, 0), 3: (1, 1), 4: (0, 1)},
                       mu={1: W("a"), 2: W("b"), 3: W("c"), 4: Word()}, base=0,
                       tree=frozenset({4}))
    return SimplicialTree(host, frozenset({1, 2, 3}))


@pytest.mark.unit
class TestRepresentatives:

    def test_unipotent_forms(self):
        order, signs, suffixes, gamma = next(unipotent_forms([W("a"), W("ba")], 0))
        assert order == [1, 2]
        assert signs == {1: 1, 2: 1}
        assert suffixes == {1: Word(), 2: W("a")}
        assert gamma == Word()

    def test_find_triangular_on_rose(self, h, h_map, run_config):
        rep = find_triangular(h, FreeFactorSystem.trivial(2), run_config)
        assert rep.map == h_map
        assert rep.conjugator == Word()

    def test_adapted_to_factor(self, h, run_config):
        rep = find_triangular(h, FreeFactorSystem.parse(2, [["a"]]), run_config)
        assert rep.factor_edges == frozenset({1})
        assert rep.is_perfect()
        assert rep.free_edges() == [2]

    def test_rank_two_factor(self, h2, run_config):
        rep = find_triangular(h2, FreeFactorSystem.parse(3, [["a", "b"]]), run_config, perfect=True)
        assert rep.factor_edges == frozenset({1, 2})
        assert is_outer_equal(induced_automorphism(rep.map), h2)

    def test_supplied_map_comes_first(self, h, h_map, run_config):
        rep = next(triangular_candidates(h, FreeFactorSystem.trivial(2), run_config, h_map))
        assert rep.map is h_map

    def test_not_unipotent(self):
        swap = Automorphism.parse(["b", "a"], ["b", "a"])
        with pytest.raises(RealizationFailed):
            find_triangular(swap, FreeFactorSystem.trivial(2), RunConfig(whitehead_depth=1))

    def test_factor_words_in_factor_order(self):
        F = FreeFactorSystem.parse(3, [["c"], ["a", "b"]])
        assert factor_words(F) == [W("a"), W("b"), W("c")]

    def test_two_factors(self, run_config):
        """a, b fixed and c ↦ cab, adapted to {[⟨a⟩], [⟨b⟩]}"""
        phi = Automorphism.parse(["a", "b", "cab"], ["a", "b", "cBA"])
        F = FreeFactorSystem.parse(3, [["a"], ["b"]])
        rep = find_triangular(phi, F, run_config)
        assert rep.factor_edges == frozenset({1, 2})
        assert rep.factor_count == 2
        assert rep.joins_factors
        assert rep.is_perfect()
        assert is_outer_equal(induced_automorphism(rep.map), phi)


@pytest.mark.unit
class TestRestriction:

    def test_edge_bound(self):
        assert edge_bound(2) == 2
        assert edge_bound(3) == Fraction(7, 2)

    def test_rose_assembly(self):
        assembled = rose_assembly(2, 3)
        assert assembled.case == 'rose'
        assert assembled.edge_count() == 2
        assert all(f.is_identity() for f in assembled.maps)

    def test_identity_map(self):
        assert identity_map(rose(2)).is_identity()

    def test_restrict_to_fixed_factor(self, h, h2):
        assert restrict(h, fold([W("a")])).is_identity()
        assert restrict(h2, fold([W("a"), W("b")])).is_identity()

    def test_restrict_to_whole_group(self, h):
        assert restrict(h, fold([W("a"), W("b")])).images == h.images

    def test_restrict_requires_invariance(self, h):
        with pytest.raises(RestrictionNotCertified):
            restrict(h, fold([W("b")]))

    def test_lift_fixes_the_edge(self, loop_b_tree, h):
        assert lift_to_aut(loop_b_tree, h).images == h.images

    def test_lift_needs_one_orbit(self, t0, h1):
        with pytest.raises(RestrictionNotCertified):
            lift_to_aut(t0, h1)


@pytest.mark.unit
class TestAssembly:

    def test_circle_over_rank_one(self, loop_b_tree, h, mocker):
        solve = mocker.Mock()
        assembled = assemble_filtered_graph(loop_b_tree, [h], solve)
        solve.assert_not_called()
        assert assembled.case == 'circle'
        assert assembled.edge_count() == 2
        f = assembled.maps[0]
        assert f.suffixes[2] == EdgePath(0, (1,))
        assert induced_automorphism(f).images == h.images

    def test_circle_over_rank_two(self, loop_c_tree, h2, mocker):
        solve = mocker.Mock(return_value=(rose(2), [identity_map(rose(2))]))
        assembled = assemble_filtered_graph(loop_c_tree, [h2], solve)
        solve.assert_called_once()
        restricted = solve.call_args.args[0]
        assert is_inner(restricted[0])
        assert assembled.case == 'circle'
        assert assembled.edge_count() == 3
        assert assembled.maps[0].prefixes[3] == EdgePath(0, (-2, 1, 2))
        assert not assembled.maps[0].suffixes[3]
        assert is_outer_equal(induced_automorphism(assembled.maps[0]), h2)

    def test_balloon(self, balloon_tree, h1, h_map, mocker):
        solve = mocker.Mock(return_value=(h_map.graph, [h_map]))
        assembled = assemble_filtered_graph(balloon_tree, [h1], solve)
        assert assembled.case == 'balloon'
        assert assembled.edge_count() == 3
        assert assembled.graph.mu[3] == W("c")
        assert is_outer_equal(induced_automorphism(assembled.maps[0]), h1)

    def test_two_orbits_rejected(self, t0, h1, mocker):
        with pytest.raises(RestrictionNotCertified):
            assemble_filtered_graph(t0, [h1], mocker.Mock())

    def test_moved_tree_rejected(self, loop_b_tree, mocker):
        swap = Automorphism.parse(["b", "a"], ["b", "a"])
        with pytest.raises(RestrictionNotCertified):
            assemble_filtered_graph(loop_b_tree, [swap], mocker.Mock())

    def test_solvability_report(self, loop_b_tree, h, mocker):
        assembled = assemble_filtered_graph(loop_b_tree, [h], mocker.Mock())
        report = solvability_report(assembled.graph, assembled.maps)
        assert [s.rank for s in report.stages] == [0, 1]
        assert report.derived_length_estimate == 1
        assert report.bound == 2
        assert not report.contains_free_subgroup
        assert report.to_dict()['stages'][1]['generators'] == ['a']
