# core/kolchin/assembly.py - Filtered graph and triangular lifts from a one-orbit fixed tree

"""
A fixed tree with one edge orbit splits F_n as V * tWt⁻¹ (arc) or
V *_t (circle). The filtered graph for the vertex groups comes from a
recursive run; the edge of the tree becomes the topmost edge.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from ...services.system_logger import LogCategory, get_logger
from ...utils.error_handler import KolchinError, RestrictionNotCertified
from ..automorphisms.automorphism import (Automorphism, inner_conjugator, is_outer_equal,
                                          substitute)
from ..automorphisms.unipotent_linalg import is_unipotent
from ..graphs.marked_graph import EdgePath, MarkedGraph, rose
from ..graphs.triangular_map import TriangularMap, induced_automorphism, validate_triangular
from ..trees.tree_space import FixednessResult, SimplicialTree, is_fixed_by
from ..words.subgroup_core import SubgroupGraph, conjugator, fold, in_double_coset
from ..words.word_core import Word

# (graph, maps) for generators of a free group of smaller rank
Solver = Callable[[List[Automorphism]], Tuple[MarkedGraph, List[TriangularMap]]]


@dataclass(frozen=True)
class AssembledGraph:
    graph: MarkedGraph
    maps: Tuple[TriangularMap, ...]
    case: str

    def edge_count(self) -> int:
        return len(self.graph.edges)

    def to_dict(self) -> Dict:
        return {
            'case': self.case,
            'graph': self.graph.to_dict(),
            'edge_count': self.edge_count(),
            'edge_bound': str(edge_bound(self.graph.rank)),
            'lifts': [f.to_dict() for f in self.maps],
        }


def edge_bound(rank: int) -> Fraction:
    return Fraction(3 * rank, 2) - 1


def identity_map(graph: MarkedGraph) -> TriangularMap:
    return validate_triangular(graph, {}, {})


def _lift_conjugator(phi: Automorphism, V: SubgroupGraph, t: Word, W: SubgroupGraph) -> Word:
    gamma_v = conjugator(V, fold([phi(w) for w in V.basis()])) if not V.is_trivial() else Word()
    gamma_w = conjugator(W, fold([phi(w) for w in W.basis()])) if not W.is_trivial() else Word()
    if gamma_v is None or gamma_w is None:
        raise RestrictionNotCertified("vertex group is not carried to a conjugate")
    found = in_double_coset(V, t, W, gamma_v * phi(t) * ~gamma_w)
    if not found:
        raise RestrictionNotCertified("edge is not carried into its double coset", edge=str(t))
    return ~found.a * gamma_v


def lift_to_aut(T: SimplicialTree, phi: Automorphism, cert: Optional[FixednessResult] = None) -> Automorphism:
    """The lift of φ fixing the edge of a one-orbit fixed tree"""
    q = T.quotient
    if len(q.edges) != 1:
        raise RestrictionNotCertified("tree must have exactly one edge orbit", edges=len(q.edges))
    cert = cert or is_fixed_by(T, phi)
    if not cert:
        raise RestrictionNotCertified("tree is not fixed by the generator", reason=cert.reason)
    qe = q.edges[0]
    V, W = q.vertices[qe.source].group, q.vertices[qe.target].group
    if V.is_trivial() and W.is_trivial():
        g = cert.conjugators[qe.source]
    else:
        g = _lift_conjugator(phi, V, qe.word, W)
    return Automorphism.inner(phi.rank, g).compose(phi)


def restrict(phi: Automorphism, H: SubgroupGraph, t: Word = Word()) -> Automorphism:
    """w ↦ t⁻¹·φ(t·w·t⁻¹)·t on tHt⁻¹, in the coordinates of H.basis()"""
    inverse = phi.inverse()
    images, inverse_images = [], []
    for b in H.basis():
        w = t * b * ~t
        image = H.express_in_basis(~t * phi(w) * t)
        back = H.express_in_basis(~t * inverse(w) * t)
        if image is None or back is None:
            raise RestrictionNotCertified("generator does not preserve the vertex group",
                                          generator=str(b))
        images.append(image)
        inverse_images.append(back)
    try:
        restricted = Automorphism.validate(images, inverse_images)
    except KolchinError as exc:
        raise RestrictionNotCertified(f"restriction is not an automorphism: {exc.message}") from exc
    if not is_unipotent(restricted.abelianization()):
        raise RestrictionNotCertified("restriction is not unipotent on homology")
    return restricted


def _rank_one(generators: List[Automorphism]) -> Tuple[MarkedGraph, List[TriangularMap]]:
    if any(not g.is_identity() for g in generators):
        raise RestrictionNotCertified("rank one restriction is not the identity")
    graph = rose(1)
    return graph, [identity_map(graph) for _ in generators]


@dataclass
class _Piece:
    """A recursive result transported into F_n"""
    graph: MarkedGraph
    maps: List[TriangularMap]
    restricted: List[Automorphism]
    basis: List[Word]
    shift_vertex: int = 0
    shift_edge: int = 0

    def vertex(self, v: int) -> int:
        return v + self.shift_vertex

    def edge(self, e: int) -> int:
        return (abs(e) + self.shift_edge) * (1 if e > 0 else -1)

    def path(self, p: EdgePath) -> EdgePath:
        return EdgePath(self.vertex(p.start), tuple(self.edge(e) for e in p.edges))

    def loop(self, w: Word) -> EdgePath:
        """Loop at the piece base for a word in the piece coordinates"""
        return self.path(self.graph.word_to_loop(w))

    def correction(self, i: int) -> Word:
        """c (piece coordinates) with induced(f_i) = i_c ∘ restricted_i"""
        induced = induced_automorphism(self.maps[i])
        c = inner_conjugator(induced.compose(self.restricted[i].inverse()))
        if c is None:
            raise RestrictionNotCertified("recursive lift is not outer equal to the restriction")
        return c


def _piece(H: SubgroupGraph, lifts: List[Automorphism], t: Word, solve: Solver) -> _Piece:
    restricted = [restrict(phi, H, t) for phi in lifts]
    if H.rank == 1:
        graph, maps = _rank_one(restricted)
    else:
        graph, maps = solve(restricted)
    return _Piece(graph, list(maps), restricted, H.basis())


def _abelian(H: SubgroupGraph) -> bool:
    return H.rank == 1


def assemble_filtered_graph(T: SimplicialTree, generators: Sequence[Automorphism],
                            solve: Solver, certs: Sequence[FixednessResult] = None) -> AssembledGraph:
    """Common filtered graph and one triangular lift per generator"""
    n = T.rank
    q = T.quotient
    if len(q.edges) != 1:
        raise RestrictionNotCertified("tree must have exactly one edge orbit", edges=len(q.edges))
    qe = q.edges[0]
    V, W = q.vertices[qe.source].group, q.vertices[qe.target].group
    t = qe.word
    circle = qe.source == qe.target
    if not circle and _abelian(V) and not _abelian(W):
        V, W, t = W, V, ~t
    if V.is_trivial():
        raise RestrictionNotCertified("fixed tree has a trivial vertex group at the edge")
    certs = list(certs) if certs is not None else [None] * len(generators)
    lifts = []
    for phi, cert in zip(generators, certs):
        cert = cert or is_fixed_by(T, phi)
        if not cert:
            raise RestrictionNotCertified("tree is not fixed by the generator", reason=cert.reason)
        lifts.append(Automorphism.inner(n, _lift_conjugator(phi, V, t, W)).compose(phi))

    base = _piece(V, lifts, Word(), solve)
    vertices = list(base.graph.vertices)
    edges = {e: base.graph.edges[e] for e in base.graph.edges}
    mu = {e: substitute(base.basis, base.graph.mu[e]) for e in base.graph.edges}
    tree = set(base.graph.tree)
    filtration = list(base.graph.filtration)
    prefixes: List[Dict[int, EdgePath]] = [{e: f.prefixes[e] for e in edges} for f in base.maps]
    suffixes: List[Dict[int, EdgePath]] = [{e: f.suffixes[e] for e in edges} for f in base.maps]
    top = max(edges) + 1
    p0 = base.graph.base

    if circle:
        case = 'circle'
        edges[top] = (p0, p0)
        mu[top] = t
        for i, phi_hat in enumerate(lifts):
            s = base_restricted_word(V, ~t * phi_hat(t))
            c = base.correction(i)
            prefixes[i][top] = base.loop(c)
            suffixes[i][top] = base.loop(s * ~c)
    elif _abelian(W):
        case = 'balloon'
        beta = W.basis()[0]
        for phi_hat in lifts:
            if ~t * phi_hat(t * beta * ~t) * t != beta:
                raise RestrictionNotCertified("abelian vertex group is not fixed by the lift")
        edges[top] = (p0, p0)
        mu[top] = t * beta * ~t
        for i in range(len(lifts)):
            c = base.correction(i)
            prefixes[i][top] = base.loop(c)
            suffixes[i][top] = base.loop(~c)
    else:
        case = 'arc'
        other = _piece(W, lifts, t, solve)
        other.shift_vertex = max(vertices) + 1
        other.shift_edge = max(edges)
        for v in other.graph.vertices:
            vertices.append(other.vertex(v))
        for e, (o, d) in other.graph.edges.items():
            edges[other.edge(e)] = (other.vertex(o), other.vertex(d))
            word = substitute(other.basis, other.graph.mu[e])
            mu[other.edge(e)] = t * word * ~t if word else Word()
        tree |= {other.edge(e) for e in other.graph.tree}
        filtration += [other.edge(e) for e in other.graph.filtration]
        for i, f in enumerate(other.maps):
            for e in other.graph.edges:
                prefixes[i][other.edge(e)] = other.path(f.prefixes[e])
                suffixes[i][other.edge(e)] = other.path(f.suffixes[e])
        top = max(edges) + 1
        q0 = other.vertex(other.graph.base)
        edges[top] = (p0, q0)
        mu[top] = Word()
        tree.add(top)
        for i in range(len(lifts)):
            prefixes[i][top] = base.loop(base.correction(i))
            suffixes[i][top] = other.loop(~other.correction(i))
    filtration.append(top)

    graph = MarkedGraph(rank=n, vertices=tuple(vertices), edges=edges, mu=mu, base=p0,
                        tree=frozenset(tree), filtration=tuple(filtration))
    graph.validate_marking()
    maps = []
    for i, phi in enumerate(generators):
        f = validate_triangular(graph, prefixes[i], suffixes[i])
        if not is_outer_equal(induced_automorphism(f), phi):
            raise RestrictionNotCertified("assembled lift does not represent the generator",
                                          generator=i + 1)
        maps.append(f)
    if n > 1 and len(edges) > edge_bound(n):
        raise RestrictionNotCertified("filtered graph exceeds the edge bound",
                                      edges=len(edges), bound=edge_bound(n))
    get_logger().info(LogCategory.ASSEMBLY, 'assemble',
                      f"{case} case: {len(edges)} edges for rank {n}")
    return AssembledGraph(graph, tuple(maps), case)


def base_restricted_word(V: SubgroupGraph, w: Word) -> Word:
    coords = V.express_in_basis(w)
    if coords is None:
        raise RestrictionNotCertified("lift does not carry the loop edge into t·V", word=str(w))
    return coords


def rose_assembly(rank: int, count: int) -> AssembledGraph:
    graph = rose(rank)
    return AssembledGraph(graph, tuple(identity_map(graph) for _ in range(count)), 'rose')


# Solvability


@dataclass(frozen=True)
class StageImage:
    edge: str
    rank: int
    generators: Tuple[Word, ...]

    def to_dict(self) -> Dict:
        return {'edge': self.edge, 'rank': self.rank,
                'generators': [str(w) for w in self.generators]}


@dataclass(frozen=True)
class SolvabilityReport:
    stages: Tuple[StageImage, ...]
    derived_length_estimate: int
    bound: Fraction
    contains_free_subgroup: bool

    def to_dict(self) -> Dict:
        return {
            'stages': [s.to_dict() for s in self.stages],
            'derived_length_estimate': self.derived_length_estimate,
            'bound': str(self.bound),
            'contains_free_subgroup': self.contains_free_subgroup,
        }


def solvability_report(graph: MarkedGraph, maps: Sequence[TriangularMap]) -> SolvabilityReport:
    """Images of the prefix and suffix maps at each filtration stage"""
    stages = []
    for e in graph.filtration:
        words = []
        for f in maps:
            for p in (f.prefixes[e], f.suffixes[e]):
                if p:
                    loop = graph.concat(graph.tree_paths[p.start], p,
                                        graph.reverse(graph.tree_paths[p.start]))
                    words.append(graph.loop_to_word(loop))
        H = fold(words) if words else SubgroupGraph.trivial()
        stages.append(StageImage(graph.names.get(e, str(e)), H.rank, tuple(H.basis())))
    estimate = sum(1 for s in stages if s.rank >= 1)
    bound = edge_bound(graph.rank)
    if graph.rank > 1 and estimate > bound:
        raise RestrictionNotCertified("derived series estimate exceeds the edge bound",
                                      estimate=estimate, bound=bound)
    return SolvabilityReport(tuple(stages), estimate, bound, any(s.rank >= 2 for s in stages))
