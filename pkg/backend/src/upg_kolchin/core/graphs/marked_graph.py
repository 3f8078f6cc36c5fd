# core/graphs/marked_graph.py - Marked graphs, filtrations and edge paths

"""
Finite graphs with a marking of π₁ by F_n.

Edges have positive integer ids; an oriented edge is a signed id, ``-e``
being the reverse of ``e``. The marking is stored as a word μ(e) for every
edge, with μ(tree edge) = ε, so the word of a loop is the reduced product of
μ over its edges.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from ...utils.error_handler import (InputValidationError, NonConcatenablePath,
                                    NotABasis, NotClosedPath, WordNotRealizable)
from ..words.subgroup_core import FoldingEngine
from ..words.word_core import ALPHABET, Basis, Word, free_reduce


@dataclass(frozen=True)
class EdgePath:
    """A sequence of oriented edges starting at ``start``"""

    start: int
    edges: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'edges', tuple(self.edges))

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    def __bool__(self) -> bool:
        return bool(self.edges)

    def is_tight(self) -> bool:
        return all(self.edges[i] != -self.edges[i + 1] for i in range(len(self.edges) - 1))

    def contains_edge(self, e: int) -> bool:
        return e in self.edges or -e in self.edges

    def find(self, sub: Sequence[int]) -> int:
        """Index of the first occurrence of ``sub`` in the edge sequence, or -1"""
        sub = tuple(sub)
        k = len(sub)
        for i in range(len(self.edges) - k + 1):
            if self.edges[i:i + k] == sub:
                return i
        return -1


def tighten(p: EdgePath, graph: 'MarkedGraph' = None) -> EdgePath:
    """[p], the tight path homotopic to p rel endpoints"""
    if graph is not None:
        graph.validate_path(p)
    return EdgePath(p.start, free_reduce(p.edges))


@dataclass(frozen=True, eq=False)
class MarkedGraph:
    """A filtered marked graph.

    ``edges`` maps edge id → (origin, terminus); ``mu`` maps edge id → word;
    ``filtration`` lists edge ids bottom to top.
    """

    rank: int
    vertices: Tuple[int, ...]
    edges: Dict[int, Tuple[int, int]]
    mu: Dict[int, Word]
    base: int
    tree: frozenset
    lengths: Dict[int, Fraction] = field(default_factory=dict)
    filtration: Tuple[int, ...] = ()
    names: Dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'vertices', tuple(self.vertices))
        object.__setattr__(self, 'tree', frozenset(self.tree))
        lengths = {e: Fraction(self.lengths.get(e, 1)) for e in self.edges}
        if any(x <= 0 for x in lengths.values()):
            raise InputValidationError("edge lengths must be positive")
        object.__setattr__(self, 'lengths', lengths)
        if not self.filtration:
            object.__setattr__(self, 'filtration', tuple(sorted(self.edges)))
        else:
            object.__setattr__(self, 'filtration', tuple(self.filtration))
        if sorted(self.filtration) != sorted(self.edges):
            raise InputValidationError("filtration must list every edge exactly once")
        names = dict(self.names)
        if not names and len(self.edges) <= len(ALPHABET):
            names = {e: ALPHABET[i] for i, e in enumerate(sorted(self.edges))}
        object.__setattr__(self, 'names', names)

    # Structure

    def __eq__(self, other) -> bool:
        if not isinstance(other, MarkedGraph):
            return False
        return (self.rank, self.vertices, self.edges, self.mu, self.base, self.tree,
                self.lengths, self.filtration) == \
            (other.rank, other.vertices, other.edges, other.mu, other.base, other.tree,
             other.lengths, other.filtration)

    def __hash__(self) -> int:
        return hash((self.rank, self.vertices, tuple(sorted(self.edges.items())), self.base))

    def origin(self, e: int) -> int:
        o, t = self.edges[abs(e)]
        return o if e > 0 else t

    def terminus(self, e: int) -> int:
        o, t = self.edges[abs(e)]
        return t if e > 0 else o

    def edge_word(self, e: int) -> Word:
        w = self.mu[abs(e)]
        return w if e > 0 else ~w

    def length(self, e: int) -> Fraction:
        return self.lengths[abs(e)]

    def stratum(self, e: int) -> int:
        """1-based filtration index of the edge"""
        return self.filtration.index(abs(e)) + 1

    def edge_at(self, i: int) -> int:
        return self.filtration[i - 1]

    @cached_property
    def multigraph(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(self.vertices)
        for e, (o, t) in self.edges.items():
            g.add_edge(o, t, key=e)
        return g

    def covolume(self) -> Fraction:
        return sum(self.lengths.values(), Fraction(0))

    def star(self, v: int) -> List[int]:
        """Oriented edges with origin v"""
        out = []
        for e, (o, t) in sorted(self.edges.items()):
            if o == v:
                out.append(e)
            if t == v:
                out.append(-e)
        return out

    # Paths

    def end_of(self, p: EdgePath) -> int:
        return self.terminus(p.edges[-1]) if p.edges else p.start

    def validate_path(self, p: EdgePath):
        v = p.start
        if v not in self.vertices:
            raise NonConcatenablePath(f"vertex {v} is not in the graph")
        for e in p.edges:
            if abs(e) not in self.edges:
                raise NonConcatenablePath(f"unknown edge {e}")
            if self.origin(e) != v:
                raise NonConcatenablePath(f"edge {e} does not start at vertex {v}", path=p.edges)
            v = self.terminus(e)

    def path(self, start: int, edges: Iterable[int]) -> EdgePath:
        p = EdgePath(start, tuple(edges))
        self.validate_path(p)
        return p

    def concat(self, *paths: EdgePath) -> EdgePath:
        edges: Tuple[int, ...] = ()
        for i, p in enumerate(paths):
            if i > 0 and p.start != self.end_of(paths[i - 1]) and (paths[i - 1].edges or p.edges):
                raise NonConcatenablePath("paths do not concatenate")
            edges += p.edges
        return EdgePath(paths[0].start if paths else self.base, edges)

    def reverse(self, p: EdgePath) -> EdgePath:
        return EdgePath(self.end_of(p), tuple(-e for e in reversed(p.edges)))

    def is_closed(self, p: EdgePath) -> bool:
        return self.end_of(p) == p.start

    def in_subgraph(self, p: EdgePath, level: int) -> bool:
        """Every edge of p lies in G_level"""
        allowed = set(self.filtration[:level])
        return all(abs(e) in allowed for e in p.edges)

    def path_length(self, p: EdgePath, excluded: Iterable[int] = ()) -> Fraction:
        skip = set(excluded)
        return sum((self.length(e) for e in p.edges if abs(e) not in skip), Fraction(0))

    def cyclically_tighten(self, p: EdgePath) -> EdgePath:
        """Tight cyclic representative of a closed path (start vertex may move)"""
        q = tighten(p)
        edges = q.edges
        start = q.start
        while len(edges) >= 2 and edges[0] == -edges[-1]:
            start = self.terminus(edges[0])
            edges = edges[1:-1]
        return EdgePath(start, edges)

    def format_path(self, p: EdgePath) -> str:
        out = []
        for e in p.edges:
            name = self.names.get(abs(e), f"e{abs(e)}")
            if e > 0:
                out.append(name)
            elif len(name) == 1:
                out.append(name.upper())
            else:
                out.append(f"{name}^-1")
        separator = "" if all(len(x) == 1 for x in out) else " "
        return separator.join(out)

    def parse_path(self, text: str, start: Optional[int] = None) -> EdgePath:
        """Parse a path written with single-letter edge names"""
        lookup = {name: e for e, name in self.names.items()}
        edges = []
        for ch in text.strip():
            if ch in lookup:
                edges.append(lookup[ch])
            elif ch.lower() in lookup:
                edges.append(-lookup[ch.lower()])
            else:
                raise InputValidationError(f"unknown edge name {ch!r}")
        if start is None:
            start = self.origin(edges[0]) if edges else self.base
        return self.path(start, edges)

    # Marking

    @cached_property
    def tree_paths(self) -> Dict[int, EdgePath]:
        """Tree path from the base vertex to every vertex"""
        tree_graph = nx.MultiGraph()
        tree_graph.add_nodes_from(self.vertices)
        for e in self.tree:
            o, t = self.edges[e]
            tree_graph.add_edge(o, t, key=e)
        paths = {self.base: EdgePath(self.base)}
        for u, v, e in _bfs_keyed(tree_graph, self.base):
            step = e if self.origin(e) == u and self.terminus(e) == v else -e
            paths[v] = EdgePath(self.base, paths[u].edges + (step,))
        return paths

    def loop_to_word(self, loop: EdgePath) -> Word:
        if not self.is_closed(loop):
            raise NotClosedPath("path is not closed", path=loop.edges)
        return self.path_word(loop)

    def path_word(self, p: EdgePath) -> Word:
        """Word of the loop tree(base, start)·p·tree(end, base)"""
        letters: List[int] = []
        for e in p.edges:
            letters.extend(self.edge_word(e).letters)
        return Word(tuple(letters))

    @cached_property
    def non_tree_edges(self) -> Tuple[int, ...]:
        return tuple(e for e in self.filtration if e not in self.tree)

    def validate_marking(self) -> bool:
        g = self.multigraph
        if not self.vertices or not nx.is_connected(g):
            raise NotABasis("graph is not connected")
        if self.base not in self.vertices:
            raise NotABasis(f"base vertex {self.base} not in graph")
        tree_graph = nx.Graph()
        tree_graph.add_nodes_from(self.vertices)
        for e in self.tree:
            if e not in self.edges:
                raise NotABasis(f"tree edge {e} not in graph")
            o, t = self.edges[e]
            if o == t or tree_graph.has_edge(o, t):
                raise NotABasis("tree contains a cycle")
            tree_graph.add_edge(o, t)
        if not nx.is_tree(tree_graph):
            raise NotABasis("tree edges do not form a spanning tree")
        if any(self.mu[e] for e in self.tree):
            raise NotABasis("tree edges must be marked by the empty word")
        if len(self.non_tree_edges) != self.rank:
            raise NotABasis(f"expected {self.rank} non-tree edges, got {len(self.non_tree_edges)}")
        self._marking_inverse()
        return True

    def _marking_inverse(self) -> Tuple[Word, ...]:
        cached = self.__dict__.get('_inverse_cache')
        if cached is not None:
            return cached
        engine = FoldingEngine(track_values=True)
        for j, e in enumerate(self.non_tree_edges):
            engine.add_loop(self.mu[e], Word((j + 1,)))
        engine.fold()
        moves = engine.moves()
        if engine.conflicts or len(engine.vertices) != 1 or len(engine.records) != self.rank:
            raise NotABasis("edge words do not form a basis of the free group",
                            words=[str(self.mu[e]) for e in self.non_tree_edges])
        inverse = []
        for i in range(1, self.rank + 1):
            if (engine.base, i) not in moves:
                raise NotABasis("edge words do not generate the free group")
            inverse.append(moves[(engine.base, i)][1])
        inverse = tuple(inverse)
        # certificate: μ-words of the inverse values give back the generators
        for i, value in enumerate(inverse):
            letters: List[int] = []
            for y in value.letters:
                w = self.mu[self.non_tree_edges[abs(y) - 1]]
                letters.extend(w.letters if y > 0 else (~w).letters)
            if Word(tuple(letters)) != Word((i + 1,)):
                raise NotABasis("marking inversion failed its certificate")
        self.__dict__['_inverse_cache'] = inverse
        return inverse

    def word_to_loop(self, w: Word) -> EdgePath:
        """The tight loop at the base vertex whose word is w"""
        inverse = self._marking_inverse()
        edges: List[int] = []
        for x in w.letters:
            value = inverse[abs(x) - 1]
            for y in (value if x > 0 else ~value).letters:
                e = self.non_tree_edges[abs(y) - 1]
                step = e if y > 0 else -e
                edges.extend(self.tree_paths[self.origin(step)].edges)
                edges.append(step)
                edges.extend(self.reverse(self.tree_paths[self.terminus(step)]).edges)
        loop = EdgePath(self.base, free_reduce(edges))
        if self.loop_to_word(loop) != w:
            raise WordNotRealizable(f"could not realize {w} as a loop")
        return loop

    # Subgraphs

    def components(self, edge_ids: Iterable[int]) -> List[Tuple[frozenset, frozenset]]:
        """Connected components (vertices, edges) of the subgraph spanned by edge_ids,
        including single vertices the subgraph misses"""
        keep = set(edge_ids)
        g = nx.MultiGraph()
        g.add_nodes_from(self.vertices)
        for e in keep:
            o, t = self.edges[e]
            g.add_edge(o, t, key=e)
        out = []
        for comp in nx.connected_components(g):
            comp_edges = frozenset(e for e in keep if self.edges[e][0] in comp)
            out.append((frozenset(comp), comp_edges))
        out.sort(key=lambda c: min(c[0]))
        return out

    def with_lengths(self, lengths: Dict[int, Fraction]) -> 'MarkedGraph':
        return replace(self, lengths=dict(lengths))

    def to_dict(self, basis: Basis = None) -> Dict:
        basis = basis or Basis.standard(self.rank)
        return {
            'rank': self.rank,
            'vertices': list(self.vertices),
            'edges': [{'id': e, 'name': self.names.get(e), 'origin': o, 'terminus': t,
                       'length': str(self.lengths[e]), 'marking': self.mu[e].format(basis)}
                      for e, (o, t) in sorted(self.edges.items())],
            'base': self.base,
            'tree': sorted(self.tree),
            'filtration': list(self.filtration),
        }

    @classmethod
    def from_dict(cls, data: Dict, basis: Basis = None) -> 'MarkedGraph':
        basis = basis or Basis.standard(int(data['rank']))
        edges = {int(d['id']): (int(d['origin']), int(d['terminus'])) for d in data['edges']}
        mu = {int(d['id']): basis.parse(d.get('marking', '')) for d in data['edges']}
        lengths = {int(d['id']): Fraction(d.get('length', 1)) for d in data['edges']}
        names = {int(d['id']): d['name'] for d in data['edges'] if d.get('name')}
        return cls(rank=int(data['rank']), vertices=tuple(data['vertices']), edges=edges, mu=mu,
                   base=int(data.get('base', data['vertices'][0])), tree=frozenset(data.get('tree', [])),
                   lengths=lengths, filtration=tuple(data.get('filtration', ())), names=names)


def _bfs_keyed(g: nx.MultiGraph, source: int):
    """BFS over a multigraph yielding (u, v, edge key), keys in sorted order"""
    seen = {source}
    frontier = [source]
    while frontier:
        nxt = []
        for u in frontier:
            for _, v, key in sorted(g.edges(u, keys=True), key=lambda x: x[2]):
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
                    yield u, v, key
        frontier = nxt


def rose(rank: int, words: Sequence[Word] = None, lengths: Dict[int, Fraction] = None,
         order: Sequence[int] = ()) -> MarkedGraph:
    """One vertex, petals 1..n marked by ``words`` (default the basis), filtered by ``order``"""
    words = list(words) if words is not None else [Word((i,)) for i in range(1, rank + 1)]
    edges = {i + 1: (0, 0) for i in range(len(words))}
    mu = {i + 1: w for i, w in enumerate(words)}
    return MarkedGraph(rank=rank, vertices=(0,), edges=edges, mu=mu, base=0,
                       tree=frozenset(), lengths=lengths or {}, filtration=tuple(order))


def spanning_tree_edges(vertices: Sequence[int], edges: Dict[int, Tuple[int, int]],
                        preferred: Iterable[int] = ()) -> frozenset:
    """Kruskal spanning tree, preferring edges in ``preferred`` then lower ids"""
    preferred = set(preferred)
    g = nx.MultiGraph()
    g.add_nodes_from(vertices)
    for e, (o, t) in edges.items():
        g.add_edge(o, t, key=e, weight=(0 if e in preferred else 1, e))
    chosen = set()
    ordered = sorted(g.edges(keys=True, data=True), key=lambda x: x[3]['weight'])
    uf = nx.utils.UnionFind(vertices)
    for u, v, key, _ in ordered:
        if uf[u] != uf[v]:
            uf.union(u, v)
            chosen.add(key)
    return frozenset(chosen)
