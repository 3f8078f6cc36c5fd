# core/kolchin/kolchin_driver.py - Bouncing sequence driver

"""
Bounce a tree between the generators until every generator fixes it.

Each step either finds the tree already fixed, replaces it by the limit of
the iterates of a non-growing generator, or enlarges the invariant free
factor system: when a growing generator exposes an edge stabilizer, or when
a tracked loop keeps shrinking relative to the covolume across cycles.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from ...config.settings import RunConfig
from ...services.system_logger import LogCategory, get_logger, log_bounce_step
from ...utils.error_handler import (ErrorCategory, FewerThanTwoVertexGroups, InputValidationError,
                                    InvarianceViolation, NotUnipotentOnHomology,
                                    RealizationFailed, WindowExhausted, safe_execute)
from ..automorphisms.automorphism import Automorphism, is_inner
from ..automorphisms.unipotent_linalg import is_unipotent
from ..dynamics.growth_dynamics import (GrowthClass, LengthFunction, class_key,
                                        classify_tree_growth, limit_edge_stabilizer_candidates,
                                        limit_lengths, probe_words)
from ..graphs.triangular_map import TriangularMap
from ..trees.free_factor import (FreeFactorSystem, complexity_chain_bound, invariant_closure,
                                 is_invariant)
from ..trees.tree_space import (FixednessResult, SimplicialTree, collapse_to_one_orbit,
                                free_rose_tree, is_fixed_by, is_nielsen_pair,
                                length_witness, min_vertex_distance, tree_from_system)
from ..words.word_core import CyclicWord, Word
from .assembly import (AssembledGraph, SolvabilityReport, assemble_filtered_graph, lift_to_aut,
                       rose_assembly, solvability_report)
from .representatives import Representative, find_triangular, triangular_candidates

logger = get_logger()

# realization candidates tried per non-growing step
REALIZATION_ATTEMPTS = 64


class Outcome(str, Enum):
    FIXED = "FixedAlready"
    ADVANCED = "Advanced"
    ENLARGE = "EnlargeFFS"
    BLOCKED = "Blocked"


@dataclass(frozen=True)
class StepOutcome:
    kind: Outcome
    tree: Optional[SimplicialTree] = None
    witnesses: Tuple[Word, ...] = ()
    reason: str = ""
    growth: Optional[GrowthClass] = None
    limit: Optional[LengthFunction] = None
    certificate: Optional[FixednessResult] = None


@dataclass(frozen=True)
class BounceRecord:
    step: int
    generator: int
    outcome: str
    tree: str
    system: str
    complexity: str
    min_distance: Optional[str] = None
    growth: Optional[str] = None
    witnesses: Tuple[str, ...] = ()
    reason: str = ""

    def to_dict(self) -> Dict:
        return {
            'step': self.step,
            'generator': self.generator,
            'outcome': self.outcome,
            'tree': self.tree,
            'system': self.system,
            'complexity': self.complexity,
            'min_distance': self.min_distance,
            'growth': self.growth,
            'witnesses': list(self.witnesses),
            'reason': self.reason,
        }

    def format(self) -> str:
        line = f"[{self.step}] generator {self.generator}: {self.outcome}"
        if self.witnesses:
            line += f" with {', '.join(self.witnesses)}"
        if self.reason:
            line += f" ({self.reason})"
        return line + f"; F={self.system}; T: {self.tree}"


@dataclass
class BounceState:
    generators: Tuple[Automorphism, ...]
    config: RunConfig
    system: FreeFactorSystem
    tree: SimplicialTree
    supplied: Dict[int, TriangularMap] = field(default_factory=dict)
    history: List[BounceRecord] = field(default_factory=list)
    tracked: Dict[CyclicWord, Word] = field(default_factory=dict)
    ratios: List[Dict[CyclicWord, Fraction]] = field(default_factory=list)
    nielsen_pairs: List[Tuple[str, str]] = field(default_factory=list)
    enlargements: int = 0
    step: int = 0

    @property
    def rank(self) -> int:
        return self.tree.rank

    def track(self, T: SimplicialTree):
        for qe in T.quotient.edges:
            self.tracked.setdefault(class_key(qe.word), qe.word)

    def snapshot(self):
        T = self.tree
        cov = T.covolume()
        self.ratios.append({key: T.translation_length(w) / cov for key, w in self.tracked.items()})

    def restart_tracking(self):
        self.tracked = {}
        self.ratios = []
        self.track(self.tree)
        self.snapshot()

    def record(self, generator: int, outcome: StepOutcome):
        try:
            distance = str(min_vertex_distance(self.tree).distance)
        except FewerThanTwoVertexGroups:
            distance = None
        entry = BounceRecord(
            step=self.step, generator=generator, outcome=outcome.kind.value,
            tree=self.tree.summary(), system=self.system.format(),
            complexity=str(self.system.complexity()), min_distance=distance,
            growth=outcome.growth.label if outcome.growth else None,
            witnesses=tuple(str(w) for w in outcome.witnesses), reason=outcome.reason)
        self.history.append(entry)
        log_bounce_step(generator, outcome.kind.value, entry.to_dict())


def _certify(T: SimplicialTree, phi: Automorphism, config: RunConfig) -> FixednessResult:
    return is_fixed_by(T, phi, search_length=config.conjugator_search_length,
                       state_cap=config.support_state_cap)


def _solve_lengths(rep: Representative, limit: LengthFunction,
                   probes: Sequence[Word]) -> Optional[Dict[int, Fraction]]:
    """Edge lengths of the collapsed rose that reproduce the limit on every probe"""
    host = rep.graph
    free = rep.free_edges()
    symbols = {e: sympy.Symbol(f"x{e}", positive=True) for e in free}
    equations = []
    for w in probes:
        loop = host.cyclically_tighten(host.word_to_loop(w))
        counts: Dict[int, int] = {}
        for e in loop.edges:
            if abs(e) in symbols:
                counts[abs(e)] = counts.get(abs(e), 0) + 1
        value = limit(w)
        if not counts:
            if value != 0:
                return None
            continue
        lhs = sum(k * symbols[e] for e, k in counts.items())
        equations.append(sympy.Eq(lhs, sympy.Rational(value.numerator, value.denominator)))
    solutions = sympy.linsolve(equations, [symbols[e] for e in free])
    if not solutions:
        return None
    solution = next(iter(solutions))
    if any(not value.is_Rational for value in solution):
        return None
    lengths = {e: Fraction(int(v.p), int(v.q)) for e, v in zip(free, solution)}
    if any(x <= 0 for x in lengths.values()):
        return None
    return lengths


def realize_limit(state: BounceState, index: int) -> Tuple[Optional[SimplicialTree], Optional[LengthFunction]]:
    """Re-realize the limit of a non-growing generator as a collapsed rose, certified exactly"""
    phi = state.generators[index]
    T = state.tree
    config = state.config
    attempts = 0
    for rep in triangular_candidates(phi, state.system, config, state.supplied.get(index)):
        # one-vertex collapse would join distinct factors
        if rep.joins_factors or not rep.is_perfect():
            continue
        attempts += 1
        if attempts > REALIZATION_ATTEMPTS:
            break
        host = rep.graph
        queries = [host.mu[e] for e in rep.free_edges()] + list(state.tracked.values())
        probes = probe_words(queries)
        limit = limit_lengths(T, phi, probes, config)
        if limit.degree != 0:
            return None, limit
        lengths = _solve_lengths(rep, limit, probes)
        if lengths is None:
            continue
        candidate = rep.collapsed_tree(lengths)
        if any(candidate.translation_length(w) != limit(w) for w in probes):
            continue
        if not _certify(candidate, phi, config):
            continue
        logger.debug(LogCategory.DRIVER, 'realize', f"limit realized as {candidate.summary()}")
        return candidate, limit
    return None, None


def bounce_step(state: BounceState, index: int) -> StepOutcome:
    """One bounce of the current tree off generator ``index``"""
    phi = state.generators[index]
    T = state.tree
    cert = _certify(T, phi, state.config)
    if cert:
        return StepOutcome(Outcome.FIXED, certificate=cert)
    try:
        rep = find_triangular(phi, state.system, state.config, state.supplied.get(index))
    except RealizationFailed as exc:
        return StepOutcome(Outcome.BLOCKED, reason=exc.message)
    growth = classify_tree_growth(T, rep.map)
    if growth.grower:
        candidates = limit_edge_stabilizer_candidates(T, rep.map) or [growth.witness]
        return StepOutcome(Outcome.ENLARGE, witnesses=tuple(candidates),
                           reason="edge stabilizer of the limit", growth=growth)
    loop = shrinking_loop(state)
    if loop is not None:
        return StepOutcome(Outcome.ENLARGE, witnesses=(loop,),
                           reason="loop shrinks relative to the covolume", growth=growth)
    new_tree, limit = realize_limit(state, index)
    if new_tree is None:
        return StepOutcome(Outcome.BLOCKED, reason="limit tree not realized within the search bounds",
                           growth=growth, limit=limit)
    return StepOutcome(Outcome.ADVANCED, tree=new_tree, growth=growth, limit=limit)


def shrinking_loop(state: BounceState) -> Optional[Word]:
    """A tracked loop whose length ratio fell strictly over the last two cycles"""
    if len(state.ratios) < 3:
        return None
    first, second, third = state.ratios[-3:]
    falling = [key for key in third
               if key in first and key in second and first[key] > second[key] > third[key]]
    if not falling:
        return None
    best = min(falling, key=lambda key: (third[key], key))
    return state.tracked[best]


def enlarge(state: BounceState, witnesses: Sequence[Word]):
    F = state.system
    config = state.config
    words = [w for H in F.factors for w in H.basis()] + list(witnesses)
    with logger.timed(LogCategory.FREE_FACTORS, 'invariant_closure'):
        bigger = invariant_closure(words, state.generators, config.whitehead_depth,
                                   config.support_state_cap)
    if not bigger.complexity() > F.complexity():
        raise InvarianceViolation("free factor system did not grow",
                                  before=str(F.complexity()), after=str(bigger.complexity()))
    for phi in state.generators:
        is_invariant(bigger, phi, upg=True)
    state.enlargements += 1
    if state.enlargements > complexity_chain_bound(state.rank):
        raise InvarianceViolation("more enlargements than complexity sequences")
    logger.info(LogCategory.DRIVER, 'enlarge', f"free factor system {F.format()} -> {bigger.format()}",
                details={'complexity': str(bigger.complexity())})
    state.system = bigger
    state.tree = tree_from_system(bigger)
    state.restart_tracking()


def _check_advance(state: BounceState, new_tree: SimplicialTree):
    old = state.tree
    for key, w in state.tracked.items():
        if new_tree.is_elliptic(w) and not old.is_elliptic(w):
            raise InvarianceViolation("a loop became elliptic in a non-growing limit", word=str(w))
    try:
        before = min_vertex_distance(old).distance
        after = min_vertex_distance(new_tree).distance
    except FewerThanTwoVertexGroups:
        return
    if after < before:
        raise InvarianceViolation("vertex distance dropped in a non-growing limit",
                                  before=str(before), after=str(after))


def _record_nielsen_pairs(state: BounceState):
    groups = [qv.group for qv in state.tree.quotient.nontrivial()]
    for i, V in enumerate(groups):
        for W in groups[i + 1:]:
            found = safe_execute(lambda: is_nielsen_pair(V, W, state.generators),
                                 fallback_result=False, category=ErrorCategory.ANALYTIC)
            pair = (V.format(), W.format())
            if found and pair not in state.nielsen_pairs:
                state.nielsen_pairs.append(pair)


@dataclass(frozen=True)
class KolchinResult:
    rank: int
    generators: Tuple[Automorphism, ...]
    tree: SimplicialTree
    system: FreeFactorSystem
    history: Tuple[BounceRecord, ...]
    edge_tree: SimplicialTree
    assembly: AssembledGraph
    lifts: Tuple[Automorphism, ...]
    solvability: SolvabilityReport
    nielsen_pairs: Tuple[Tuple[str, str], ...] = ()

    def to_dict(self) -> Dict:
        return {
            'rank': self.rank,
            'fixed_tree': self.tree.to_dict(),
            'free_factor_system': self.system.to_dict(),
            'one_orbit_tree': self.edge_tree.to_dict(),
            'filtered_graph': self.assembly.to_dict(),
            'lifts': [phi.to_dict() for phi in self.lifts],
            'solvability': self.solvability.to_dict(),
            'nielsen_pairs': [list(p) for p in self.nielsen_pairs],
            'history': [r.to_dict() for r in self.history],
        }


def _validate_generators(generators: Sequence[Automorphism]) -> int:
    if not generators:
        raise InputValidationError("at least one generator is required")
    rank = generators[0].rank
    for i, phi in enumerate(generators, start=1):
        if phi.rank != rank:
            raise InputValidationError("generators act on free groups of different ranks",
                                       generator=i, rank=phi.rank, expected=rank)
        if not is_unipotent(phi.abelianization()):
            raise NotUnipotentOnHomology(f"generator {i} is not unipotent on homology", generator=i)
    return rank


def _finish(state: BounceState) -> KolchinResult:
    T = state.tree
    config = state.config
    for i, phi in enumerate(state.generators, start=1):
        witness = length_witness(T, phi, config.marking_length_bound)
        if witness is not None:
            raise InvarianceViolation("fixed tree changes a translation length",
                                      generator=i, word=str(witness))
    edge_tree = collapse_to_one_orbit(T) if len(T.quotient.edges) > 1 else T
    edge_certs = [_certify(edge_tree, phi, config) for phi in state.generators]
    if not all(edge_certs):
        raise RealizationFailed("collapsed tree lost its fixedness certificate")
    with logger.timed(LogCategory.ASSEMBLY, 'assemble_filtered_graph'):
        assembly = assemble_filtered_graph(edge_tree, state.generators,
                                           lambda gens: _solve_vertex_group(gens, config), edge_certs)
    lifts = tuple(lift_to_aut(edge_tree, phi, cert) for phi, cert in zip(state.generators, edge_certs))
    _record_nielsen_pairs(state)
    return KolchinResult(
        rank=T.rank, generators=state.generators, tree=T, system=state.system,
        history=tuple(state.history), edge_tree=edge_tree, assembly=assembly, lifts=lifts,
        solvability=solvability_report(assembly.graph, assembly.maps),
        nielsen_pairs=tuple(state.nielsen_pairs))


def _solve_vertex_group(generators: List[Automorphism], config: RunConfig):
    result = run(generators, config)
    return result.assembly.graph, list(result.assembly.maps)


def run(generators: Sequence[Automorphism], config: RunConfig = None,
        initial_system: Optional[FreeFactorSystem] = None,
        supplied: Optional[Dict[int, TriangularMap]] = None) -> KolchinResult:
    """Common fixed tree, filtered graph and triangular lifts for a finite UPG set"""
    generators = tuple(generators)
    rank = _validate_generators(generators)
    config = (config or RunConfig()).for_rank(rank)
    system = initial_system or FreeFactorSystem.trivial(rank)
    if system.is_whole_group():
        raise InputValidationError("starting free factor system must be proper")
    for phi in generators:
        if not is_invariant(system, phi, upg=True):
            raise InputValidationError("starting free factor system is not invariant",
                                       system=system.format())
    logger.info(LogCategory.DRIVER, 'run', f"rank {rank}, {len(generators)} generators, F={system.format()}")

    if all(is_inner(phi) for phi in generators):
        T = free_rose_tree(rank)
        assembly = rose_assembly(rank, len(generators))
        return KolchinResult(
            rank=rank, generators=generators, tree=T, system=system, history=(), edge_tree=T,
            assembly=assembly, lifts=tuple(Automorphism.identity(rank) for _ in generators),
            solvability=solvability_report(assembly.graph, assembly.maps))
    if rank == 1:
        raise NotUnipotentOnHomology("rank one generators must be trivial")

    state = BounceState(generators, config, system, tree_from_system(system),
                        supplied=dict(supplied or {}))
    state.restart_tracking()
    while True:
        certs: List[FixednessResult] = []
        restarted = False
        for index, phi in enumerate(generators):
            state.step += 1
            if state.step > config.max_bounce_steps:
                raise WindowExhausted("bouncing sequence did not stabilise",
                                      steps=config.max_bounce_steps, system=state.system.format())
            outcome = bounce_step(state, index)
            state.record(index + 1, outcome)
            if outcome.kind == Outcome.FIXED:
                certs.append(outcome.certificate)
                continue
            if outcome.kind == Outcome.BLOCKED:
                raise RealizationFailed(outcome.reason, generator=index + 1,
                                        system=state.system.format())
            if outcome.kind == Outcome.ENLARGE:
                enlarge(state, outcome.witnesses)
                restarted = True
                break
            _check_advance(state, outcome.tree)
            state.tree = outcome.tree
            state.track(outcome.tree)
        if restarted:
            continue
        if len(certs) == len(generators):
            return _finish(state)
        state.snapshot()
