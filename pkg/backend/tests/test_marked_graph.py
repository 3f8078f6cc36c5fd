# tests/test_marked_graph.py - Unit tests for marked graphs and edge paths

from fractions import Fraction

import pytest

from upg_kolchin.core.graphs.marked_graph import (EdgePath, MarkedGraph, rose,
                                                  spanning_tree_edges, tighten)
from upg_kolchin.core.words.word_core import Basis, Word
from upg_kolchin.utils.error_handler import (InputValidationError, NonConcatenablePath,
                                             NotABasis, NotClosedPath)

W = Basis.standard(3).parse


@pytest.fixture
def theta():
    """Two vertices joined by a tree edge and petals marked a, b"""
    return MarkedGraph(rank=2, vertices=(0, 1), edges={1: (0, 1), 2: (0, 1), 3: (0, 1)},
                       mu={1: Word(), 2: W("a"), 3: W("b")}, base=0, tree=frozenset({1}))


@pytest.mark.unit
class TestEdgePath:

    def test_tighten(self):
        p = EdgePath(0, (1, 2, -2, 3))
        assert not p.is_tight()
        assert tighten(p) == EdgePath(0, (1, 3))

    def test_find(self):
        p = EdgePath(0, (1, 2, 1, 2, 3))
        assert p.find((2, 3)) == 3
        assert p.find((3, 1)) == -1
        assert p.contains_edge(-3)


@pytest.mark.unit
class TestStructure:

    def test_rose_defaults(self):
        G = rose(3)
        assert G.vertices == (0,)
        assert G.filtration == (1, 2, 3)
        assert G.names == {1: 'a', 2: 'b', 3: 'c'}
        assert G.covolume() == 3

    def test_filtration_order(self):
        G = rose(2, order=[2, 1])
        assert G.stratum(2) == 1
        assert G.edge_at(2) == 1

    def test_filtration_must_list_every_edge(self):
        with pytest.raises(InputValidationError):
            rose(2, order=[1])

    def test_lengths_must_be_positive(self):
        with pytest.raises(InputValidationError):
            rose(2, lengths={1: Fraction(0)})

    def test_star(self, theta):
        assert theta.star(0) == [1, 2, 3]
        assert theta.star(1) == [-1, -2, -3]

    def test_dict_round_trip(self, theta):
        data = theta.to_dict()
        assert data['edges'][1]['marking'] == 'a'
        assert MarkedGraph.from_dict(data) == theta

    def test_components(self, theta):
        comps = theta.components([2])
        assert comps == [(frozenset({0, 1}), frozenset({2}))]
        assert len(theta.components([])) == 2

    def test_spanning_tree_prefers_edges(self):
        edges = {1: (0, 1), 2: (0, 1), 3: (1, 1)}
        assert spanning_tree_edges((0, 1), edges) == frozenset({1})
        assert spanning_tree_edges((0, 1), edges, preferred=[2]) == frozenset({2})


@pytest.mark.unit
class TestMarking:

    def test_valid_markings(self, theta):
        assert rose(2).validate_marking()
        assert rose(3, [W("a"), W("b"), W("bc")]).validate_marking()
        assert theta.validate_marking()

    def test_not_a_basis(self):
        with pytest.raises(NotABasis):
            rose(2, [W("aa"), W("b")]).validate_marking()

    def test_tree_edge_must_be_unmarked(self):
        G = MarkedGraph(rank=1, vertices=(0, 1), edges={1: (0, 1), 2: (0, 1)},
                        mu={1: W("a"), 2: Word()}, base=0, tree=frozenset({1}))
        with pytest.raises(NotABasis):
            G.validate_marking()

    def test_disconnected(self):
        G = MarkedGraph(rank=1, vertices=(0, 1), edges={1: (0, 0)},
                        mu={1: W("a")}, base=0, tree=frozenset())
        with pytest.raises(NotABasis):
            G.validate_marking()

    def test_word_to_loop_on_rose(self):
        G = rose(2)
        assert G.word_to_loop(W("abA")) == EdgePath(0, (1, 2, -1))

    def test_word_to_loop_changed_basis(self):
        G = rose(3, [W("a"), W("b"), W("bc")])
        loop = G.word_to_loop(W("c"))
        assert loop == EdgePath(0, (-2, 3))
        assert G.loop_to_word(loop) == W("c")

    def test_word_to_loop_through_tree(self, theta):
        loop = theta.word_to_loop(W("aB"))
        assert loop == EdgePath(0, (2, -3))
        assert theta.word_to_loop(W("a")) == EdgePath(0, (2, -1))

    def test_loop_round_trip(self, theta):
        for text in ["ab", "aBAb", "bbbA", ""]:
            w = W(text)
            assert theta.loop_to_word(theta.word_to_loop(w)) == w

    def test_open_path_has_no_word(self, theta):
        with pytest.raises(NotClosedPath):
            theta.loop_to_word(EdgePath(0, (2,)))


@pytest.mark.unit
class TestPaths:

    def test_concat_and_reverse(self, theta):
        p = theta.path(0, [2])
        q = theta.path(1, [-3])
        pq = theta.concat(p, q)
        assert pq == EdgePath(0, (2, -3))
        assert theta.reverse(pq) == EdgePath(0, (3, -2))

    def test_concat_mismatch(self, theta):
        with pytest.raises(NonConcatenablePath):
            theta.concat(theta.path(0, [2]), theta.path(0, [3]))

    def test_invalid_path(self, theta):
        with pytest.raises(NonConcatenablePath):
            theta.path(0, [2, 3])

    def test_path_length(self):
        G = rose(2, lengths={1: Fraction(1, 2), 2: Fraction(3)})
        p = G.path(0, [1, 2, -1])
        assert G.path_length(p) == 4
        assert G.path_length(p, excluded=[2]) == 1

    def test_cyclically_tighten(self):
        G = rose(2)
        assert G.cyclically_tighten(EdgePath(0, (1, 2, -1))) == EdgePath(0, (2,))

    def test_parse_and_format(self):
        G = rose(2)
        p = G.parse_path("aB")
        assert p == EdgePath(0, (1, -2))
        assert G.format_path(p) == "aB"
        with pytest.raises(InputValidationError):
            G.parse_path("ax")

    def test_in_subgraph(self):
        G = rose(3, order=[1, 2, 3])
        assert G.in_subgraph(G.path(0, [1, -2]), 2)
        assert not G.in_subgraph(G.path(0, [3]), 2)
