# core/kolchin/representatives.py - Unipotent-form representatives adapted to a free factor system

"""
Search for a basis y_1..y_n of F_n, and an inner adjustment, in which a
generator reads y_i ↦ y_i·u_i with u_i in earlier basis elements. The
factors of the current free factor system come first, one block of basis
elements per factor, so the resulting rose carries them as its bottom petals.
"""

from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from ...config.settings import RunConfig
from ...services.system_logger import LogCategory, get_logger, log_search
from ...utils.error_handler import KolchinError, RealizationFailed
from ..automorphisms.automorphism import (Automorphism, inner_conjugator, is_outer_equal,
                                          substitute)
from ..graphs.marked_graph import EdgePath, MarkedGraph, rose
from ..graphs.triangular_map import TriangularMap, induced_automorphism, validate_triangular
from ..trees.free_factor import FreeFactorSystem, whitehead_moves
from ..trees.tree_space import SimplicialTree, complete_basis
from ..words.subgroup_core import fold, is_conjugate
from ..words.word_core import Word, cyclic_reduce

# powers of the bottom generator tried as extra inner adjustments
INNER_POWERS = (0, 1, -1, 2, -2)


@dataclass(frozen=True)
class Representative:
    map: TriangularMap
    factor_edges: frozenset
    conjugator: Word
    factor_count: int = 1

    @property
    def graph(self) -> MarkedGraph:
        return self.map.graph

    def free_edges(self) -> List[int]:
        return [e for e in self.graph.filtration if e not in self.factor_edges]

    @property
    def joins_factors(self) -> bool:
        """Collapsing the bottom petals would merge distinct factors into one vertex group"""
        return self.factor_count > 1

    def is_perfect(self) -> bool:
        """Every suffix above the factor petals runs inside them"""
        return all({abs(x) for x in self.map.suffixes[e].edges} <= self.factor_edges
                   for e in self.free_edges())

    def collapsed_tree(self, lengths: Dict[int, object] = None) -> SimplicialTree:
        host = self.graph
        if lengths:
            merged = dict(host.lengths)
            merged.update(lengths)
            host = host.with_lengths(merged)
        return SimplicialTree(host, self.factor_edges)


def factor_blocks(F: FreeFactorSystem) -> List[List[Word]]:
    return [list(H.basis()) for H in F.factors]


def factor_words(F: FreeFactorSystem) -> List[Word]:
    """Bases of all factors, concatenated in factor order"""
    return [w for block in factor_blocks(F) for w in block]


def _blocks_match(basis: Sequence[Word], F: FreeFactorSystem) -> bool:
    start = 0
    for H in F.factors:
        end = start + H.rank
        if not is_conjugate(fold(list(basis[start:end])), H):
            return False
        start = end
    return True


def _edge_form(z: Word, j: int, chosen: set) -> Optional[Tuple[int, Word]]:
    letters = z.letters
    if letters and letters[0] == j and all(abs(x) in chosen for x in letters[1:]):
        return 1, Word(letters[1:])
    if letters and letters[-1] == j and all(abs(x) in chosen for x in letters[:-1]):
        return -1, ~Word(letters[:-1])
    return None


def _greedy_order(images: Sequence[Word], r: int, bottom: int):
    n = len(images)
    order, signs, suffixes = [bottom], {bottom: 1}, {bottom: Word()}
    chosen = {bottom}
    for pool in (range(1, r + 1), range(r + 1, n + 1)):
        remaining = [j for j in pool if j not in chosen]
        while remaining:
            for j in remaining:
                form = _edge_form(images[j - 1], j, chosen)
                if form is not None:
                    break
            else:
                return None
            signs[j], suffixes[j] = form
            order.append(j)
            chosen.add(j)
            remaining.remove(j)
    return order, signs, suffixes


def unipotent_forms(images: Sequence[Word], r: int) -> Iterator[Tuple[list, dict, dict, Word]]:
    """(order, signs, suffixes, γ) such that i_γ∘θ is in unipotent triangular form"""
    n = len(images)
    for bottom in (range(1, r + 1) if r else range(1, n + 1)):
        core, conj = cyclic_reduce(images[bottom - 1])
        if core.letters != (bottom,):
            continue
        y = Word((bottom,))
        for k in INNER_POWERS:
            gamma = y ** k * ~conj
            adjusted = [gamma * z * ~gamma for z in images]
            found = _greedy_order(adjusted, r, bottom)
            if found is not None:
                yield found + (gamma,)


def _flip(w: Word, signs: Dict[int, int]) -> Tuple[int, ...]:
    return tuple(x * signs[abs(x)] for x in w.letters)


def representatives_in_basis(phi: Automorphism, basis: Sequence[Word], r: int,
                             factor_count: int = 1) -> Iterator[Representative]:
    n = phi.rank
    host = rose(n, basis)
    try:
        images = [Word(host.word_to_loop(phi(y)).edges) for y in basis]
    except KolchinError:
        return
    for order, signs, suffixes, gamma in unipotent_forms(images, r):
        words = [basis[j - 1] if signs[j] > 0 else ~basis[j - 1] for j in range(1, n + 1)]
        target = rose(n, words, order=order)
        paths = {j: EdgePath(0, _flip(u, signs)) for j, u in suffixes.items()}
        try:
            f = validate_triangular(target, {}, paths)
            induced = induced_automorphism(f)
        except KolchinError as exc:
            log_search(LogCategory.TRIANGULAR, 'search', f"rejected form: {exc}")
            continue
        if not is_outer_equal(induced, phi):
            continue
        conjugator = inner_conjugator(induced.compose(phi.inverse()))
        yield Representative(f, frozenset(order[:r]), conjugator, factor_count)


def _supplied(phi: Automorphism, f: TriangularMap, F: FreeFactorSystem) -> Optional[Representative]:
    host = f.graph
    if len(host.vertices) != 1 or not f.unipotent_form:
        return None
    blocks, start = [], 0
    for H in F.factors:
        blocks.append([host.mu[e] for e in host.filtration[start:start + H.rank]])
        start += H.rank
    bottom = frozenset(host.filtration[:start])
    supplied = FreeFactorSystem.from_words(host.rank, blocks)
    if not supplied.same_as(F):
        return None
    induced = induced_automorphism(f)
    if not is_outer_equal(induced, phi):
        return None
    return Representative(f, bottom, inner_conjugator(induced.compose(phi.inverse())),
                          max(len(F.factors), 1))


def triangular_candidates(phi: Automorphism, F: FreeFactorSystem, config: RunConfig,
                          supplied: Optional[TriangularMap] = None) -> Iterator[Representative]:
    """Representatives in breadth-first order over Whitehead changes of basis"""
    if supplied is not None:
        rep = _supplied(phi, supplied, F)
        if rep is not None:
            yield rep
    n = phi.rank
    words = factor_words(F)
    r = len(words)
    factor_count = max(len(F.factors), 1)
    start = tuple(complete_basis(words, n))
    moves = [mv.automorphism(n).images for mv in whitehead_moves(n)]
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        basis, depth = queue.popleft()
        yield from representatives_in_basis(phi, basis, r, factor_count)
        if depth >= config.whitehead_depth:
            continue
        for images in moves:
            nxt = tuple(substitute(basis, x) for x in images)
            if nxt in seen:
                continue
            if not _blocks_match(nxt, F):
                continue
            if len(seen) >= config.support_state_cap:
                log_search(LogCategory.TRIANGULAR, 'search', "basis search hit the state cap",
                           states=len(seen))
                return
            seen.add(nxt)
            queue.append((nxt, depth + 1))


def find_triangular(phi: Automorphism, F: FreeFactorSystem, config: RunConfig,
                    supplied: Optional[TriangularMap] = None, perfect: bool = False) -> Representative:
    for rep in triangular_candidates(phi, F, config, supplied):
        if not perfect or rep.is_perfect():
            get_logger().debug(LogCategory.TRIANGULAR, 'search',
                               f"representative {rep.map.format()}")
            return rep
    raise RealizationFailed("no triangular representative within the search bounds",
                            depth=config.whitehead_depth, system=F.format())
