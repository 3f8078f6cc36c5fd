# core/trees/tree_space.py - Simplicial F_n-trees in the collapse model

"""
A :class:`SimplicialTree` is the universal cover of a marked graph with the
lifts of a subgraph A collapsed to points. Components of A carry the vertex
groups; every other edge has trivial stabilizer and its own length.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from ...services.system_logger import LogCategory, log_search
from ...utils.error_handler import (ConjugatorMissing, FewerThanTwoVertexGroups,
                                    InputValidationError, RealizationFailed)
from ..automorphisms.automorphism import Automorphism, inner_conjugator
from ..graphs.marked_graph import EdgePath, MarkedGraph, _bfs_keyed, rose, spanning_tree_edges
from ..words.subgroup_core import (SubgroupGraph, conjugator, fold,
                                   in_double_coset)
from ..words.word_core import CyclicWord, Word, enumerate_cyclic_words, enumerate_words
from .free_factor import FreeFactorSystem


@dataclass(frozen=True)
class QuotientVertex:
    index: int
    vertices: frozenset
    rep: int
    group: SubgroupGraph
    generators: Tuple[Word, ...]

    @property
    def trivial(self) -> bool:
        return self.group.is_trivial()


@dataclass(frozen=True)
class QuotientEdge:
    edge: int
    source: int
    target: int
    word: Word
    length: Fraction


@dataclass(frozen=True)
class QuotientGraph:
    vertices: Tuple[QuotientVertex, ...]
    edges: Tuple[QuotientEdge, ...]

    @cached_property
    def multigraph(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(qv.index for qv in self.vertices)
        for qe in self.edges:
            g.add_edge(qe.source, qe.target, key=qe.edge, length=qe.length)
        return g

    def nontrivial(self) -> List[QuotientVertex]:
        return [qv for qv in self.vertices if not qv.trivial]


@dataclass(frozen=True, eq=False)
class SimplicialTree:
    """Universal cover of ``host`` with the lifts of ``collapsed`` crushed"""

    host: MarkedGraph
    collapsed: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, 'collapsed', frozenset(self.collapsed))
        if not self.collapsed <= set(self.host.edges):
            raise InputValidationError("collapsed edges must belong to the host graph")
        if not set(self.host.edges) - self.collapsed:
            raise InputValidationError("tree is degenerate: every edge is collapsed")

    @property
    def rank(self) -> int:
        return self.host.rank

    def length(self, e: int) -> Fraction:
        return Fraction(0) if abs(e) in self.collapsed else self.host.length(e)

    def covolume(self) -> Fraction:
        return sum((self.host.length(e) for e in self.host.edges if e not in self.collapsed),
                   Fraction(0))

    def translation_length(self, w) -> Fraction:
        word = w.word() if isinstance(w, CyclicWord) else w
        loop = self.host.cyclically_tighten(self.host.word_to_loop(word))
        return sum((self.length(e) for e in loop.edges), Fraction(0))

    def is_elliptic(self, w) -> bool:
        return self.translation_length(w) == 0

    @cached_property
    def quotient(self) -> QuotientGraph:
        return quotient_graph_of_groups(self)

    def to_dict(self) -> Dict:
        q = self.quotient
        return {
            'host': self.host.to_dict(),
            'collapsed': sorted(self.collapsed),
            'quotient': {
                'vertices': [{'index': qv.index,
                              'group': [str(w) for w in qv.generators]} for qv in q.vertices],
                'edges': [{'edge': qe.edge, 'source': qe.source, 'target': qe.target,
                           'marking': str(qe.word), 'length': str(qe.length)} for qe in q.edges],
            },
            'covolume': str(self.covolume()),
        }

    def summary(self) -> str:
        q = self.quotient
        groups = ", ".join("<" + ",".join(str(w) for w in qv.generators) + ">"
                           for qv in q.vertices if not qv.trivial) or "none"
        loops = ", ".join(f"{qe.word}:{qe.length}" for qe in q.edges)
        return f"vertex groups {groups}; edges {loops}"


def quotient_graph_of_groups(T: SimplicialTree) -> QuotientGraph:
    host = T.host
    vertices: List[QuotientVertex] = []
    alpha: Dict[int, EdgePath] = {}
    owner: Dict[int, int] = {}
    for index, (comp_vertices, comp_edges) in enumerate(host.components(T.collapsed)):
        rep = min(comp_vertices)
        tree = spanning_tree_edges(sorted(comp_vertices), {e: host.edges[e] for e in comp_edges})
        g = nx.MultiGraph()
        g.add_nodes_from(comp_vertices)
        for e in tree:
            g.add_edge(*host.edges[e], key=e)
        alpha[rep] = EdgePath(rep)
        for u, v, e in _bfs_keyed(g, rep):
            step = e if host.origin(e) == u and host.terminus(e) == v else -e
            alpha[v] = EdgePath(rep, alpha[u].edges + (step,))
        gens = []
        for e in sorted(comp_edges - tree):
            loop = EdgePath(rep, alpha[host.origin(e)].edges + (e,) +
                            host.reverse(alpha[host.terminus(e)]).edges)
            gens.append(host.path_word(loop))
        group = fold(gens) if gens else SubgroupGraph.trivial()
        basis = tuple(group.basis()) if gens else ()
        vertices.append(QuotientVertex(index, frozenset(comp_vertices), rep, group, basis))
        for v in comp_vertices:
            owner[v] = index
    edges = []
    for e in host.filtration:
        if e in T.collapsed:
            continue
        o, t = host.origin(e), host.terminus(e)
        path = EdgePath(alpha[o].start, alpha[o].edges + (e,) + host.reverse(alpha[t]).edges)
        edges.append(QuotientEdge(e, owner[o], owner[t], host.path_word(path), host.length(e)))
    return QuotientGraph(tuple(vertices), tuple(edges))


def elliptic_system(T: SimplicialTree) -> FreeFactorSystem:
    groups = [qv.group for qv in T.quotient.vertices if not qv.trivial]
    system = FreeFactorSystem.from_words(T.rank, [g.basis() for g in groups])
    return replace(system, realization=(T.host, T.collapsed))


# Fixedness


@dataclass(frozen=True)
class FixednessResult:
    fixed: bool
    conjugators: Dict[int, Word] = field(default_factory=dict)
    edge_witnesses: Dict[int, Tuple[Word, Word]] = field(default_factory=dict)
    witness: Optional[Word] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.fixed

    def to_dict(self) -> Dict:
        return {
            'fixed': self.fixed,
            'conjugators': {str(k): str(v) for k, v in sorted(self.conjugators.items())},
            'witness': str(self.witness) if self.witness is not None else None,
            'reason': self.reason,
        }


def length_witness(T: SimplicialTree, phi: Automorphism, max_length: int) -> Optional[Word]:
    """Shortest class w with ℓ_T(φ(w)) ≠ ℓ_T(w)"""
    for c in enumerate_cyclic_words(T.rank, max_length):
        w = c.word()
        if T.translation_length(phi(w)) != T.translation_length(w):
            return w
    return None


def _group_elements(group: SubgroupGraph, max_length: int) -> List[Word]:
    if group.is_trivial():
        return [Word()]
    basis = group.basis()
    out = []
    for w in enumerate_words(len(basis), max_length):
        letters: List[int] = []
        for x in w.letters:
            b = basis[abs(x) - 1]
            letters.extend(b.letters if x > 0 else (~b).letters)
        out.append(Word(tuple(letters)))
    return out


def is_fixed_by(T: SimplicialTree, phi: Automorphism, search_length: int = 6,
                refute_length: int = 3, state_cap: int = 5000) -> FixednessResult:
    """Certify an equivariant isometry T → T for φ, or refute it"""
    witness = length_witness(T, phi, refute_length)
    if witness is not None:
        return FixednessResult(False, witness=witness, reason="translation length changes")
    q = T.quotient
    gammas: Dict[int, Word] = {}
    for qv in q.vertices:
        if qv.trivial:
            continue
        image = fold([phi(w) for w in qv.generators])
        gamma = conjugator(qv.group, image)
        if gamma is None:
            return FixednessResult(False, reason=f"vertex group {qv.index} is not mapped to a conjugate")
        gammas[qv.index] = gamma

    trivial = [qv.index for qv in q.vertices if qv.trivial]
    if trivial and not gammas:
        inner = inner_conjugator(phi)
        if inner is None:
            return FixednessResult(False, witness=length_witness(T, phi, refute_length + 2),
                                   reason="free tree is fixed only by inner automorphisms")
        gammas[trivial[0]] = ~inner
    order = [v for v in nx.bfs_tree(q.multigraph, next(iter(gammas))).nodes if v in trivial]
    order += [v for v in trivial if v not in order]
    group_of = {qv.index: qv.group for qv in q.vertices}

    def candidates(v: int, assigned: Dict[int, Word]) -> List[Word]:
        out: List[Word] = []
        for qe in q.edges:
            if qe.target == v and qe.source in assigned:
                gp, t = assigned[qe.source], qe.word
                for x in _group_elements(group_of[qe.source], search_length):
                    out.append(~(x * t) * gp * phi(t))
            elif qe.source == v and qe.target in assigned:
                gp, t = assigned[qe.target], qe.word
                for x in _group_elements(group_of[qe.target], search_length):
                    out.append(t * x * gp * ~phi(t))
            if out:
                break
        return list(dict.fromkeys(out))

    attempts = [0]

    def check(assigned: Dict[int, Word]):
        witnesses = {}
        for qe in q.edges:
            image = assigned[qe.source] * phi(qe.word) * ~assigned[qe.target]
            result = in_double_coset(group_of[qe.source], qe.word, group_of[qe.target], image)
            if not result:
                return None
            witnesses[qe.edge] = (result.a, result.b)
        return witnesses

    def search(i: int, assigned: Dict[int, Word]):
        if i == len(order):
            witnesses = check(assigned)
            return (dict(assigned), witnesses) if witnesses is not None else None
        v = order[i]
        if v in assigned:
            return search(i + 1, assigned)
        for gamma in candidates(v, assigned):
            attempts[0] += 1
            if attempts[0] > state_cap:
                return None
            assigned[v] = gamma
            found = search(i + 1, assigned)
            if found is not None:
                return found
            del assigned[v]
        return None

    found = search(0, dict(gammas))
    log_search(LogCategory.TREES, 'fixedness', f"fixedness search tried {attempts[0]} conjugators",
               fixed=found is not None)
    if found is None:
        return FixednessResult(False, witness=length_witness(T, phi, refute_length + 2),
                               reason="no conjugator assignment passes the edge tests")
    assigned, witnesses = found
    return FixednessResult(True, assigned, witnesses)


# Vertex distances and Nielsen pairs


@dataclass(frozen=True)
class VertexDistance:
    distance: Fraction
    pairs: Tuple[Tuple[int, int, Tuple[int, ...]], ...]


def min_vertex_distance(T: SimplicialTree) -> VertexDistance:
    """Least distance between distinct vertices with nontrivial stabilizers"""
    q = T.quotient
    nontrivial = {qv.index for qv in q.nontrivial()}
    if not nontrivial:
        raise FewerThanTwoVertexGroups("tree has no vertex with nontrivial stabilizer")
    states = nx.DiGraph()
    oriented = []
    for qe in q.edges:
        oriented.append((qe.edge, qe.source, qe.target, qe.length))
        oriented.append((-qe.edge, qe.target, qe.source, qe.length))
    for v in nontrivial:
        for e, s, t, length in oriented:
            if s == v:
                states.add_edge(('start', v), ('arc', e), weight=length)
    for e, s, t, length in oriented:
        if t in nontrivial:
            states.add_edge(('arc', e), ('end', t), weight=0)
            continue
        for e2, s2, t2, length2 in oriented:
            if s2 == t and e2 != -e:
                states.add_edge(('arc', e), ('arc', e2), weight=length2)
    best: Optional[Fraction] = None
    for v in sorted(nontrivial):
        if ('start', v) not in states:
            continue
        dist = nx.single_source_dijkstra_path_length(states, ('start', v))
        for w in nontrivial:
            d = dist.get(('end', w))
            if d is not None and (best is None or d < best):
                best = d
    if best is None:
        raise FewerThanTwoVertexGroups("no path joins two vertices with nontrivial stabilizers")
    pairs = []
    for v in sorted(nontrivial):
        if ('start', v) not in states:
            continue
        for w in sorted(nontrivial):
            target = ('end', w)
            if target not in states or not nx.has_path(states, ('start', v), target):
                continue
            if nx.dijkstra_path_length(states, ('start', v), target) != best:
                continue
            for path in nx.all_shortest_paths(states, ('start', v), target, weight='weight'):
                edges = tuple(node[1] for node in path if node[0] == 'arc')
                pairs.append((v, w, edges))
    return VertexDistance(Fraction(best), tuple(sorted(set(pairs))))


@dataclass(frozen=True)
class NielsenPairResult:
    nielsen_pair: bool
    conjugators: Tuple[Optional[Word], ...] = ()

    def __bool__(self) -> bool:
        return self.nielsen_pair


def is_nielsen_pair(V: SubgroupGraph, W: SubgroupGraph,
                    generators: Sequence[Automorphism]) -> NielsenPairResult:
    """Every generator carries V and W by a common conjugator γ: φ(V) = γ⁻¹Vγ, φ(W) = γ⁻¹Wγ"""
    common = []
    for phi in generators:
        gamma_v = conjugator(V, fold([phi(w) for w in V.basis()]))
        gamma_w = conjugator(W, fold([phi(w) for w in W.basis()]))
        if gamma_v is None or gamma_w is None:
            raise ConjugatorMissing("vertex group is not invariant under the generator")
        result = in_double_coset(V, Word(), W, gamma_v * ~gamma_w)
        if not result:
            return NielsenPairResult(False, tuple(common) + (None,))
        common.append(~result.a * gamma_v)
    return NielsenPairResult(True, tuple(common))


# Constructions


def free_rose_tree(rank: int) -> SimplicialTree:
    return SimplicialTree(rose(rank))


def is_basis(words: Sequence[Word], rank: int) -> bool:
    return len(words) == rank and fold(list(words)) == SubgroupGraph.full(rank)


def complete_basis(factor_words: Sequence[Word], rank: int) -> List[Word]:
    """Extend the factor words by standard generators to a basis of F_n"""
    missing = rank - len(factor_words)
    if missing < 0:
        raise RealizationFailed("free factor system has too many generators")
    for combo in combinations(range(1, rank + 1), missing):
        words = list(factor_words) + [Word((i,)) for i in combo]
        if is_basis(words, rank):
            return words
    raise RealizationFailed("could not complete the free factor system to a basis",
                            factors=[str(w) for w in factor_words])


def tree_from_system(F: FreeFactorSystem) -> SimplicialTree:
    """Tree with trivial edge stabilizers whose vertex groups are F's factors"""
    n = F.rank
    factor_bases = [f.basis() for f in F.factors]
    flat = [w for ws in factor_bases for w in ws]
    words = complete_basis(flat, n)
    complement = words[len(flat):]
    if len(F.factors) <= 1:
        host = rose(n, words)
        return SimplicialTree(host, frozenset(range(1, len(flat) + 1)))
    # central trivial vertex 0 with an arm to each factor vertex
    vertices = [0]
    edges: Dict[int, Tuple[int, int]] = {}
    mu: Dict[int, Word] = {}
    collapsed = set()
    tree = set()
    next_edge = 1
    for k, ws in enumerate(factor_bases, start=1):
        vertices.append(k)
        for w in ws:
            edges[next_edge] = (k, k)
            mu[next_edge] = w
            collapsed.add(next_edge)
            next_edge += 1
    for k in range(1, len(factor_bases) + 1):
        edges[next_edge] = (0, k)
        mu[next_edge] = Word()
        tree.add(next_edge)
        next_edge += 1
    for w in complement:
        edges[next_edge] = (0, 0)
        mu[next_edge] = w
        next_edge += 1
    host = MarkedGraph(rank=n, vertices=tuple(vertices), edges=edges, mu=mu, base=0,
                       tree=frozenset(tree))
    host.validate_marking()
    return SimplicialTree(host, frozenset(collapsed))


def collapse_to_one_orbit(T: SimplicialTree, keep: Optional[int] = None) -> SimplicialTree:
    """Collapse every edge orbit but one, preferring a non-separating edge"""
    q = T.quotient
    if keep is None:
        g = q.multigraph
        ordered = [qe for qe in sorted(q.edges, key=lambda qe: T.host.stratum(qe.edge), reverse=True)]
        keep = ordered[0].edge
        for qe in ordered:
            h = g.copy()
            h.remove_edge(qe.source, qe.target, key=qe.edge)
            if nx.is_connected(h):
                keep = qe.edge
                break
    others = {qe.edge for qe in q.edges if qe.edge != keep}
    return SimplicialTree(T.host, T.collapsed | others)


def rescale(T: SimplicialTree, factor: Fraction) -> SimplicialTree:
    factor = Fraction(factor)
    if factor <= 0:
        raise InputValidationError("scale factor must be positive")
    lengths = {e: length * factor for e, length in T.host.lengths.items()}
    return SimplicialTree(T.host.with_lengths(lengths), T.collapsed)


def with_lengths(T: SimplicialTree, lengths: Dict[int, Fraction]) -> SimplicialTree:
    merged = dict(T.host.lengths)
    merged.update({e: Fraction(x) for e, x in lengths.items()})
    return SimplicialTree(T.host.with_lengths(merged), T.collapsed)


def lengths_agree(T: SimplicialTree, phi: Automorphism, words: Iterable[Word]) -> bool:
    return all(T.translation_length(phi(w)) == T.translation_length(w) for w in words)
