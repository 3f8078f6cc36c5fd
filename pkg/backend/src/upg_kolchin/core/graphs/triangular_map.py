# core/graphs/triangular_map.py - Upper-triangular maps on filtered marked graphs

"""
Upper-triangular homotopy equivalences f(E_i) = v_i·E_i·u_i.

Maps are compared by their tightened edge images, so the maps on a fixed
host form a group of normal forms. Composition ``compose_Q(f, g)`` is f ∘ g:
apply g first, then f.
"""

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from ...services.system_logger import LogCategory, get_logger, log_search
from ...utils.error_handler import (HostMismatch, InputValidationError, NoSplitWithinBound,
                                    NotClosed, NotUR, PrefixSuffixNotLower, VertexMoved)
from ..automorphisms.automorphism import Automorphism
from ..words.word_core import Word, free_reduce, primitive_root
from .marked_graph import EdgePath, MarkedGraph, rose, tighten


@dataclass(frozen=True, eq=False)
class TriangularMap:
    """A certified upper-triangular map; build with :func:`validate_triangular`."""

    graph: MarkedGraph
    prefixes: Dict[int, EdgePath]
    suffixes: Dict[int, EdgePath]
    unipotent_form: bool = False
    _blocks: Dict[Tuple[int, int], Tuple[int, ...]] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __eq__(self, other) -> bool:
        return isinstance(other, TriangularMap) and same_host(self.graph, other.graph) and \
            all(self.prefixes[e].edges == other.prefixes[e].edges and
                self.suffixes[e].edges == other.suffixes[e].edges for e in self.graph.edges)

    def __hash__(self) -> int:
        return hash(tuple((e, self.prefixes[e].edges, self.suffixes[e].edges)
                          for e in self.graph.filtration))

    def image(self, e: int) -> EdgePath:
        """f(e) for an oriented edge"""
        g = self.graph
        edge = abs(e)
        forward = EdgePath(g.origin(edge), self.prefixes[edge].edges + (edge,) + self.suffixes[edge].edges)
        return forward if e > 0 else g.reverse(forward)

    def apply(self, p: EdgePath) -> EdgePath:
        """[f(p)]"""
        edges: List[int] = []
        for e in p.edges:
            edges.extend(self.image(e).edges)
        return EdgePath(p.start, free_reduce(edges))

    def __call__(self, p: EdgePath) -> EdgePath:
        return self.apply(p)

    def is_identity(self) -> bool:
        return not any(self.prefixes[e] or self.suffixes[e] for e in self.graph.edges)

    def to_dict(self) -> Dict:
        g = self.graph
        return {
            'graph': g.to_dict(),
            'prefixes': {g.names.get(e, str(e)): g.format_path(self.prefixes[e]) for e in g.filtration},
            'suffixes': {g.names.get(e, str(e)): g.format_path(self.suffixes[e]) for e in g.filtration},
            'unipotent_form': self.unipotent_form,
        }

    def format(self) -> str:
        g = self.graph
        return ", ".join(f"{g.format_path(EdgePath(0, (e,)))}↦{g.format_path(self.image(e))}"
                         for e in g.filtration)


def same_host(g: MarkedGraph, h: MarkedGraph) -> bool:
    return (g.vertices, g.edges, g.mu, g.base, g.filtration) == \
        (h.vertices, h.edges, h.mu, h.base, h.filtration)


def validate_triangular(graph: MarkedGraph, prefixes: Dict[int, EdgePath] = None,
                        suffixes: Dict[int, EdgePath] = None) -> TriangularMap:
    prefixes = dict(prefixes or {})
    suffixes = dict(suffixes or {})
    tight_prefixes: Dict[int, EdgePath] = {}
    tight_suffixes: Dict[int, EdgePath] = {}
    for level, e in enumerate(graph.filtration, start=1):
        for kind, table, out, anchor in (('prefix', prefixes, tight_prefixes, graph.origin(e)),
                                         ('suffix', suffixes, tight_suffixes, graph.terminus(e))):
            p = table.get(e, EdgePath(anchor))
            graph.validate_path(p)
            if p.start != anchor:
                raise VertexMoved(f"{kind} of edge {e} starts at vertex {p.start}, not {anchor}",
                                  edge=e)
            if not graph.is_closed(p):
                raise NotClosed(f"{kind} of edge {e} is not a closed path", edge=e)
            if not graph.in_subgraph(p, level - 1):
                raise PrefixSuffixNotLower(f"{kind} of edge {e} leaves G_{level - 1}", edge=e)
            out[e] = tighten(p)
    unipotent_form = not any(tight_prefixes.values())
    f = TriangularMap(graph, tight_prefixes, tight_suffixes, unipotent_form)
    # certificate on π₁
    induced_automorphism(f)
    return f


def compose_Q(f: TriangularMap, g: TriangularMap) -> TriangularMap:
    """f ∘ g"""
    if not same_host(f.graph, g.graph):
        raise HostMismatch("maps live on different hosts")
    host = f.graph
    prefixes, suffixes = {}, {}
    for e in host.filtration:
        prefixes[e] = tighten(host.concat(f.apply(g.prefixes[e]), f.prefixes[e]))
        suffixes[e] = tighten(host.concat(f.suffixes[e], f.apply(g.suffixes[e])))
    return TriangularMap(host, prefixes, suffixes, not any(prefixes.values()))


def invert_Q(f: TriangularMap) -> TriangularMap:
    """g with f∘g = g∘f = id, built up the filtration"""
    host = f.graph
    prefixes: Dict[int, EdgePath] = {}
    suffixes: Dict[int, EdgePath] = {}
    partial = TriangularMap(host, {e: EdgePath(host.origin(e)) for e in host.edges},
                            {e: EdgePath(host.terminus(e)) for e in host.edges})
    for e in host.filtration:
        # g(v), g(u) only cross lower edges, which partial already maps correctly
        prefixes[e] = host.reverse(partial.apply(f.prefixes[e]))
        suffixes[e] = host.reverse(partial.apply(f.suffixes[e]))
        partial.prefixes[e] = prefixes[e]
        partial.suffixes[e] = suffixes[e]
    return TriangularMap(host, prefixes, suffixes, not any(prefixes.values()))


def _fill_blocks(f: TriangularMap, k: int):
    with f._lock:
        done = max((j for (_, j) in f._blocks), default=0)
        if done == 0:
            for e in f.graph.edges:
                f._blocks[(e, 0)] = (e,)
        for j in range(done + 1, k + 1):
            for e in f.graph.filtration:
                edges: List[int] = []
                for x in f.image(e).edges:
                    block = f._blocks[(abs(x), j - 1)]
                    edges.extend(block if x > 0 else tuple(-y for y in reversed(block)))
                f._blocks[(e, j)] = free_reduce(edges)


def iterate(f: TriangularMap, p: EdgePath, k: int) -> EdgePath:
    """[f^k(p)] assembled from memoized edge blocks [f^k(E)]"""
    if k == 0:
        return tighten(p)
    _fill_blocks(f, k)
    edges: List[int] = []
    for x in p.edges:
        block = f._blocks[(abs(x), k)]
        edges.extend(block if x > 0 else tuple(-y for y in reversed(block)))
    return EdgePath(p.start, free_reduce(edges))


def iterate_naive(f: TriangularMap, p: EdgePath, k: int) -> EdgePath:
    out = tighten(p)
    for _ in range(k):
        out = f.apply(out)
    return out


@dataclass(frozen=True)
class EigenrayPrefix:
    edge: int
    path: EdgePath
    blocks: Tuple[EdgePath, ...]
    degenerate: bool = False

    @property
    def boundaries(self) -> List[int]:
        """Edge offsets where each block starts"""
        out, pos = [], 1
        for b in self.blocks:
            out.append(pos)
            pos += len(b)
        return out


def eigenray_prefix(f: TriangularMap, edge: int, min_length: int) -> EigenrayPrefix:
    host = f.graph
    if f.prefixes[edge]:
        raise NotUR(f"edge {edge} has a nontrivial prefix", edge=edge)
    u = f.suffixes[edge]
    if not u:
        get_logger().warning(LogCategory.TRIANGULAR, 'eigenray',
                             f"edge {edge} has trivial suffix; eigenray is the edge itself")
        return EigenrayPrefix(edge, EdgePath(host.origin(edge), (edge,)), (), degenerate=True)
    blocks: List[EdgePath] = []
    total = 1
    while total < min_length:
        block = iterate(f, u, len(blocks))
        blocks.append(block)
        total += len(block)
    edges: Tuple[int, ...] = (edge,)
    for b in blocks:
        edges += b.edges
    path = EdgePath(host.origin(edge), edges)
    if iterate(f, EdgePath(host.origin(edge), (edge,)), len(blocks)) != path:
        raise NotUR(f"blocks of edge {edge} cancel against each other", edge=edge)
    return EigenrayPrefix(edge, path, tuple(blocks))


def is_nielsen(f: TriangularMap, p: EdgePath) -> bool:
    q = tighten(p)
    return f.apply(q) == q


@dataclass(frozen=True)
class ExceptionalPath:
    """E_i·τ^m·E_j⁻¹ with f(E_i) = E_i·τ^p and f(E_j) = E_j·τ^q"""
    first: int
    last: int
    m: int
    tau: EdgePath


def _path_root(host: MarkedGraph, p: EdgePath) -> Tuple[EdgePath, int]:
    root, k = primitive_root(Word(p.edges))
    if len(root) * k != len(p):
        # not cyclically tight; treat as its own root
        return p, 1
    return EdgePath(p.start, root.letters), k


def _as_power(host: MarkedGraph, p: EdgePath, tau: EdgePath) -> Optional[int]:
    """m with p = τ^m as edge sequences, or None"""
    if not p:
        return 0
    if not tau:
        return None
    for sign, unit in ((1, tau.edges), (-1, host.reverse(tau).edges)):
        if len(p) % len(unit) == 0 and unit * (len(p) // len(unit)) == p.edges:
            return sign * (len(p) // len(unit))
    return None


def classify_exceptional(f: TriangularMap, p: EdgePath) -> Optional[ExceptionalPath]:
    host = f.graph
    edges = tighten(p).edges
    if len(edges) < 2 or edges[0] < 0 or edges[-1] > 0:
        return None
    i, j = edges[0], -edges[-1]
    if f.prefixes[i] or f.prefixes[j]:
        return None
    u_i, u_j = f.suffixes[i], f.suffixes[j]
    if not u_i or not u_j:
        return None
    tau, _ = _path_root(host, u_i)
    if _as_power(host, u_j, tau) in (None, 0):
        return None
    if not is_nielsen(f, tau):
        return None
    middle = EdgePath(host.terminus(i), edges[1:-1])
    m = _as_power(host, middle, tau)
    if m is None or (i == j and m == 0):
        return None
    return ExceptionalPath(i, j, m, tau)


@dataclass(frozen=True)
class SplitPiece:
    path: EdgePath
    exceptional: Optional[ExceptionalPath] = None


@dataclass(frozen=True)
class Splitting:
    m: int
    path: EdgePath
    pieces: Tuple[SplitPiece, ...]


def _longest_exceptional(f: TriangularMap, edges: Tuple[int, ...], t: int, v: int,
                         roots: Dict[int, Optional[EdgePath]]) -> Optional[SplitPiece]:
    """Longest exceptional subpath of ``edges`` starting at index t"""
    host = f.graph
    e = edges[t]
    if e < 0:
        return None
    if e not in roots:
        u = f.suffixes[e]
        tau = _path_root(host, u)[0] if u and not f.prefixes[e] else None
        roots[e] = tau if tau is not None and is_nielsen(f, tau) else None
    tau = roots[e]
    if tau is None:
        return None
    best = None
    for unit in (tau.edges, host.reverse(tau).edges):
        copies = 0
        pos = t + 1
        while edges[pos:pos + len(unit)] == unit:
            copies += 1
            pos += len(unit)
        for r in range(copies, -1, -1):
            end = t + 1 + r * len(unit)
            if end >= len(edges) or edges[end] > 0:
                continue
            candidate = EdgePath(v, edges[t:end + 1])
            data = classify_exceptional(f, candidate)
            if data is not None:
                if best is None or len(candidate) > len(best.path):
                    best = SplitPiece(candidate, data)
                break
    return best


def _greedy_pieces(f: TriangularMap, q: EdgePath) -> List[SplitPiece]:
    host = f.graph
    pieces: List[SplitPiece] = []
    roots: Dict[int, Optional[EdgePath]] = {}
    t, v = 0, q.start
    edges = q.edges
    while t < len(edges):
        found = _longest_exceptional(f, edges, t, v, roots)
        piece = found or SplitPiece(EdgePath(v, (edges[t],)))
        pieces.append(piece)
        t += len(piece.path)
        v = host.end_of(piece.path)
    return pieces


def _splitting_certified(f: TriangularMap, q: EdgePath, pieces: Sequence[SplitPiece],
                         checks: int = 5) -> bool:
    for k in range(1, checks + 1):
        joined: Tuple[int, ...] = ()
        for piece in pieces:
            part = iterate(f, piece.path, k).edges
            if joined and part and joined[-1] == -part[0]:
                return False
            joined += part
        if joined != iterate(f, q, k).edges:
            return False
    return True


def split(f: TriangularMap, p: EdgePath, m_max: int) -> Splitting:
    """Least m ≤ m_max at which [f^m(p)] splits into edges and exceptional paths"""
    if not f.unipotent_form:
        raise NotUR("splitting needs all prefixes trivial")
    for m in range(m_max + 1):
        q = iterate(f, p, m)
        pieces = _greedy_pieces(f, q)
        if _splitting_certified(f, q, pieces):
            log_search(LogCategory.TRIANGULAR, 'split', f"split at m={m}", pieces=len(pieces))
            return Splitting(m, q, tuple(pieces))
    raise NoSplitWithinBound(f"no splitting with m ≤ {m_max}", m_max=m_max,
                             path=f.graph.format_path(p))


# Lengths and cancellation


def lipschitz(f: TriangularMap) -> Fraction:
    host = f.graph
    return max((host.path_length(tighten(f.image(e))) / host.length(e) for e in host.edges),
               default=Fraction(1))


def bcc_bound(f: TriangularMap) -> Fraction:
    """L(f)·cov − cov for the lift of f to the universal cover"""
    cov = f.graph.covolume()
    return lipschitz(f) * cov - cov


def _common_length(host: MarkedGraph, p: Tuple[int, ...], q: Tuple[int, ...]) -> Fraction:
    total = Fraction(0)
    for x, y in zip(p, q):
        if x != y:
            break
        total += host.length(x)
    return total


def _distance(host: MarkedGraph, p: Tuple[int, ...], q: Tuple[int, ...]) -> Fraction:
    """Distance between the endpoints of two tight paths from the base lift"""
    whole = host.path_length(EdgePath(0, p)) + host.path_length(EdgePath(0, q))
    return whole - 2 * _common_length(host, p, q)


def bcc_bruteforce(f: TriangularMap, radius: int) -> Fraction:
    """Largest d(f(b), [f(a), f(c)]) over b ∈ [a, c] with a a vertex lift and |[a, c]| ≤ radius"""
    host = f.graph
    best = Fraction(0)
    for v in host.vertices:
        a = host.tree_paths[v]
        fa = f.apply(a).edges
        # DFS over tight paths from a; images[i] is [f(a·c[:i])]
        stack = [((), [fa])]
        while stack:
            c, images = stack.pop()
            fc = images[-1]
            d_ac = _distance(host, fa, fc)
            for fb in images[1:-1]:
                gap = (_distance(host, fb, fa) + _distance(host, fb, fc) - d_ac) / 2
                if gap > best:
                    best = gap
            if len(c) >= radius:
                continue
            end = host.terminus(c[-1]) if c else v
            for e in host.star(end):
                if c and e == -c[-1]:
                    continue
                if not c and a.edges and e == -a.edges[-1]:
                    continue
                image = free_reduce(fc + f.image(e).edges)
                stack.append((c + (e,), images + [image]))
    return best


# π₁ and roses


def induced_automorphism(f: TriangularMap) -> Automorphism:
    """The automorphism f induces on π₁(G, base) ≅ F_n, certified by the inverse map"""
    host = f.graph
    g = invert_Q(f)
    images, inverse_images = [], []
    for i in range(1, host.rank + 1):
        loop = host.word_to_loop(Word((i,)))
        images.append(host.loop_to_word(f.apply(loop)))
        inverse_images.append(host.loop_to_word(g.apply(loop)))
    return Automorphism.validate(images, inverse_images)


def from_automorphism(phi: Automorphism, order: Sequence[int] = ()) -> TriangularMap:
    """Read x_i ↦ a_i·x_i·b_i on the rose, generators filtered by ``order``"""
    order = tuple(order) or tuple(range(1, phi.rank + 1))
    host = rose(phi.rank, order=order)
    prefixes, suffixes = {}, {}
    for level, i in enumerate(order):
        lower = set(order[:level])
        letters = phi.images[i - 1].letters
        positions = [t for t, x in enumerate(letters) if abs(x) == i]
        if len(positions) != 1 or letters[positions[0]] != i:
            raise PrefixSuffixNotLower(f"image of generator {i} is not of the form a·x·b",
                                       generator=i)
        t = positions[0]
        if any(abs(x) not in lower for x in letters[:t] + letters[t + 1:]):
            raise PrefixSuffixNotLower(f"image of generator {i} uses higher generators",
                                       generator=i)
        prefixes[i] = EdgePath(0, letters[:t])
        suffixes[i] = EdgePath(0, letters[t + 1:])
    return validate_triangular(host, prefixes, suffixes)


def parse_triangular(host: MarkedGraph, prefixes: Dict[str, str],
                     suffixes: Dict[str, str]) -> TriangularMap:
    """Build a map from prefix and suffix paths written with edge names"""
    lookup = {name: e for e, name in host.names.items()}

    def paths(table: Dict[str, str], anchor) -> Dict[int, EdgePath]:
        out = {}
        for name, text in table.items():
            if name not in lookup:
                raise InputValidationError(f"unknown edge name {name!r}")
            e = lookup[name]
            out[e] = host.parse_path(text, anchor(e)) if text else EdgePath(anchor(e))
        return out

    return validate_triangular(host, paths(prefixes, host.origin), paths(suffixes, host.terminus))
