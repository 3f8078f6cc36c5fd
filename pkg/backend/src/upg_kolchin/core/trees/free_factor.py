# core/trees/free_factor.py - Free factor systems, complexity and supports

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx

from ...services.system_logger import LogCategory, get_logger, log_search
from ...utils.error_handler import (InvarianceViolation, SupportIsWholeGroup,
                                    SupportSearchExhausted)
from ..automorphisms.automorphism import Automorphism
from ..words.subgroup_core import (SubgroupGraph, conjugate_into, conjugator, fold,
                                   intersect, is_conjugate)
from ..words.word_core import Basis, CyclicWord, Word, letter_key


@dataclass(frozen=True, order=True)
class ComplexitySeq:
    """Factor ranks in nonincreasing order, compared lexicographically"""

    ranks: Tuple[int, ...] = ()

    @classmethod
    def of(cls, ranks) -> 'ComplexitySeq':
        return cls(tuple(sorted((r for r in ranks if r > 0), reverse=True)))

    def is_proper(self, rank: int) -> bool:
        return self < ComplexitySeq((rank,))

    def __str__(self) -> str:
        return "(" + ",".join(str(r) for r in self.ranks) + ")"


@dataclass(frozen=True)
class FreeFactorSystem:
    """Conjugacy classes of free factors; the trivial factor is implicit."""

    rank: int
    factors: Tuple[SubgroupGraph, ...] = ()
    realization: Optional[object] = field(default=None, compare=False)

    @classmethod
    def from_words(cls, rank: int, factors: Sequence[Sequence[Word]]) -> 'FreeFactorSystem':
        return cls(rank, _dedupe([fold(list(ws)) for ws in factors]))

    @classmethod
    def parse(cls, rank: int, factors: Sequence[Sequence[str]], basis: Basis = None) -> 'FreeFactorSystem':
        basis = basis or Basis.standard(rank)
        return cls.from_words(rank, [basis.parse_many(ws) for ws in factors])

    @classmethod
    def trivial(cls, rank: int) -> 'FreeFactorSystem':
        return cls(rank)

    def complexity(self) -> ComplexitySeq:
        return ComplexitySeq.of(f.rank for f in self.factors)

    def is_trivial(self) -> bool:
        return not self.factors

    def is_whole_group(self) -> bool:
        return any(f.rank == self.rank for f in self.factors)

    def carries(self, w: Word) -> bool:
        """w is conjugate into some factor"""
        return not w or any(conjugate_into(f, w) is not None for f in self.factors)

    def carries_all(self, ws: Sequence[Word]) -> bool:
        return all(self.carries(w) for w in ws)

    def index_of(self, H: SubgroupGraph) -> Optional[int]:
        for i, f in enumerate(self.factors):
            if is_conjugate(f, H):
                return i
        return None

    def same_as(self, other: 'FreeFactorSystem') -> bool:
        return len(self.factors) == len(other.factors) and \
            all(other.index_of(f) is not None for f in self.factors)

    def to_dict(self, basis: Basis = None) -> Dict:
        basis = basis or Basis.standard(self.rank)
        return {
            'factors': [[w.format(basis) for w in f.basis()] for f in self.factors],
            'complexity': list(self.complexity().ranks),
        }

    def format(self, basis: Basis = None) -> str:
        if not self.factors:
            return "{}"
        return "{" + ", ".join("[" + f.format(basis) + "]" for f in self.factors) + "}"


def _dedupe(subgroups: Sequence[SubgroupGraph]) -> Tuple[SubgroupGraph, ...]:
    out: List[SubgroupGraph] = []
    for H in subgroups:
        if H.is_trivial():
            continue
        if not any(is_conjugate(H, K) for K in out):
            out.append(H)
    return tuple(sorted(out, key=lambda H: (-H.rank, [len(w) for w in H.basis()])))


def complexity(F: FreeFactorSystem) -> ComplexitySeq:
    return F.complexity()


def meet(F: FreeFactorSystem, G: FreeFactorSystem) -> FreeFactorSystem:
    """All nontrivial A ∩ gBg⁻¹, up to conjugacy"""
    parts = []
    for A in F.factors:
        for B in G.factors:
            parts.extend(c.in_first for c in intersect(A, B))
    return FreeFactorSystem(F.rank, _dedupe(parts))


@dataclass(frozen=True)
class InvarianceResult:
    invariant: bool
    permutation: Tuple[int, ...] = ()
    conjugators: Tuple[Word, ...] = ()

    def __bool__(self) -> bool:
        return self.invariant


def is_invariant(F: FreeFactorSystem, phi: Automorphism, upg: bool = False) -> InvarianceResult:
    """φ(F_k) = γ_k·F_{π(k)}·γ_k⁻¹ for a bijection π"""
    permutation, conjugators = [], []
    for H in F.factors:
        image = fold([phi(w) for w in H.basis()])
        hit = None
        for j, K in enumerate(F.factors):
            gamma = conjugator(image, K)
            if gamma is not None:
                hit = (j, gamma)
                break
        if hit is None:
            return InvarianceResult(False)
        permutation.append(hit[0])
        conjugators.append(hit[1])
    if len(set(permutation)) != len(permutation):
        return InvarianceResult(False)
    if upg and permutation != list(range(len(permutation))):
        raise InvarianceViolation("unipotent automorphism permutes free factors",
                                  permutation=permutation)
    return InvarianceResult(True, tuple(permutation), tuple(conjugators))


# Whitehead moves


@dataclass(frozen=True)
class WhiteheadMove:
    """Type-2 Whitehead automorphism (A, m): m ∈ A, m⁻¹ ∉ A"""

    subset: Tuple[int, ...]
    multiplier: int

    def images(self, rank: int) -> List[Word]:
        A = set(self.subset)
        m = Word((self.multiplier,))
        out = []
        for i in range(1, rank + 1):
            x = Word((i,))
            if i == abs(self.multiplier):
                out.append(x)
            elif i in A and -i in A:
                out.append(~m * x * m)
            elif i in A:
                out.append(x * m)
            elif -i in A:
                out.append(~m * x)
            else:
                out.append(x)
        return out

    def automorphism(self, rank: int) -> Automorphism:
        inverse = WhiteheadMove(
            tuple(sorted((set(self.subset) - {self.multiplier}) | {-self.multiplier}, key=letter_key)),
            -self.multiplier)
        return Automorphism(tuple(self.images(rank)), tuple(inverse.images(rank)))


def whitehead_automorphism(subset: Sequence[int], multiplier: int, rank: int) -> Automorphism:
    return WhiteheadMove(tuple(subset), multiplier).automorphism(rank)


def whitehead_moves(rank: int) -> List[WhiteheadMove]:
    """All nontrivial type-2 moves, in a fixed order"""
    letters = [x for i in range(1, rank + 1) for x in (i, -i)]
    moves = []
    for m in letters:
        others = [x for x in letters if abs(x) != abs(m)]
        for size in range(1, len(others) + 1):
            for combo in combinations(others, size):
                moves.append(WhiteheadMove(tuple(sorted((m,) + combo, key=letter_key)), m))
    return moves


def _total_length(ws: Sequence[CyclicWord]) -> int:
    return sum(len(w) for w in ws)


def _apply_all(phi: Automorphism, ws: Sequence[CyclicWord]) -> Tuple[CyclicWord, ...]:
    return tuple(phi.apply_to_class(w) for w in ws)


def whitehead_reduce(ws: Sequence[CyclicWord], rank: int) -> Tuple[Tuple[CyclicWord, ...], Automorphism]:
    """Greedy descent on total cyclic length; returns (ψ(ws), ψ)"""
    current = tuple(ws)
    psi = Automorphism.identity(rank)
    moves = [(mv, mv.automorphism(rank)) for mv in whitehead_moves(rank)]
    while True:
        best = None
        for mv, alpha in moves:
            candidate = _apply_all(alpha, current)
            length = _total_length(candidate)
            if length < _total_length(current) and (best is None or length < best[0]):
                best = (length, alpha, candidate)
        if best is None:
            return current, psi
        _, alpha, current = best
        psi = alpha.compose(psi)


@dataclass
class _SupportCandidate:
    complexity: ComplexitySeq
    generator_sets: List[Tuple[int, ...]]
    psi: Automorphism


def _generator_components(ws: Sequence[CyclicWord], rank: int) -> List[Tuple[int, ...]]:
    g = nx.Graph()
    for w in ws:
        gens = sorted({abs(x) for x in w.letters})
        g.add_nodes_from(gens)
        g.add_edges_from(zip(gens, gens[1:]))
    return sorted(tuple(sorted(c)) for c in nx.connected_components(g))


def free_factor_support(ws: Sequence[CyclicWord], rank: int, depth: int = 6,
                        state_cap: int = 5000) -> FreeFactorSystem:
    """Minimal free factor system carrying every class in ws"""
    ws = [w for w in ws if w]
    if not ws:
        return FreeFactorSystem.trivial(rank)
    reduced, psi = whitehead_reduce(ws, rank)
    moves = [mv.automorphism(rank) for mv in whitehead_moves(rank)]
    target = _total_length(reduced)

    def candidate(state, phi) -> _SupportCandidate:
        comps = _generator_components(state, rank)
        return _SupportCandidate(ComplexitySeq.of(len(c) for c in comps), comps, phi)

    best = candidate(reduced, psi)
    seen = {frozenset(reduced)}
    queue = deque([(reduced, psi, 0)])
    truncated = False
    while queue:
        state, phi, d = queue.popleft()
        if d >= depth:
            truncated = True
            continue
        for alpha in moves:
            nxt = _apply_all(alpha, state)
            if _total_length(nxt) != target:
                continue
            key = frozenset(nxt)
            if key in seen:
                continue
            if len(seen) >= state_cap:
                truncated = True
                break
            seen.add(key)
            chi = alpha.compose(phi)
            found = candidate(nxt, chi)
            if found.complexity < best.complexity:
                best = found
            queue.append((nxt, chi, d + 1))
    log_search(LogCategory.FREE_FACTORS, 'support', f"searched {len(seen)} states",
               complexity=str(best.complexity), truncated=truncated)

    if best.complexity.ranks and best.complexity.ranks[0] == rank:
        if truncated:
            raise SupportSearchExhausted(f"support not found at depth {depth}",
                                         depth=depth, states=len(seen))
        raise SupportIsWholeGroup("no proper free factor system carries the words",
                                  words=[str(w) for w in ws])
    factors = [fold([best.psi.apply_inverse(Word((i,))) for i in gens])
               for gens in best.generator_sets]
    system = FreeFactorSystem(rank, _dedupe(factors))
    if not system.carries_all([w.word() for w in ws]):
        raise SupportSearchExhausted("support candidate does not carry the words")
    return system


def complexity_chain_bound(rank: int) -> int:
    """Number of complexity sequences with sum ≤ rank"""
    # partitions of k into parts, counted for k = 0..rank
    counts = [1] + [0] * rank
    for part in range(1, rank + 1):
        for total in range(part, rank + 1):
            counts[total] += counts[total - part]
    return sum(counts)


def invariant_closure(ws: Sequence[Word], generators, depth: int = 6,
                      state_cap: int = 5000) -> FreeFactorSystem:
    """Smallest support of ws and its images that every generator leaves invariant"""
    if isinstance(generators, Automorphism):
        generators = [generators]
    generators = list(generators)
    rank = generators[0].rank
    words = [w for w in ws if w]
    for _ in range(complexity_chain_bound(rank) + 1):
        system = free_factor_support([CyclicWord.of(w) for w in words], rank, depth, state_cap)
        if all(is_invariant(system, phi) for phi in generators):
            return system
        grown = list(words)
        seen = {CyclicWord.of(x) for x in grown}
        sources = list(words) + [b for H in system.factors for b in H.basis()]
        for phi in generators:
            for w in sources:
                image = CyclicWord.of(phi(w))
                if image not in seen:
                    seen.add(image)
                    grown.append(image.word())
        get_logger().debug(LogCategory.FREE_FACTORS, 'closure',
                           f"support {system.format()} not invariant; {len(grown)} words")
        words = grown
    raise SupportSearchExhausted("invariant closure did not stabilise")
