# core/dynamics/growth_dynamics.py - Eventually polynomial growth and limit length functions

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from ...config.settings import RunConfig
from ...services.system_logger import LogCategory, get_logger, log_search
from ...utils.error_handler import (HypothesisUnverified, InputValidationError,
                                    NoPolynomialWithinWindow)
from ..automorphisms.automorphism import Automorphism
from ..graphs.marked_graph import EdgePath
from ..graphs.triangular_map import TriangularMap, induced_automorphism, is_nielsen, iterate
from ..trees.tree_space import SimplicialTree
from ..words.word_core import CyclicWord, Word

K = sympy.Symbol('k')


def class_key(w) -> CyclicWord:
    """Conjugacy class of w, identified with the class of w⁻¹"""
    c = w if isinstance(w, CyclicWord) else CyclicWord.of(w)
    inverse = ~c
    return inverse if inverse < c else c


@dataclass(frozen=True)
class GrowthFit:
    k0: int
    degree: int
    coefficients: Tuple[Fraction, ...]
    confirmations: int

    @property
    def leading(self) -> Fraction:
        return self.coefficients[self.degree] if self.degree < len(self.coefficients) else Fraction(0)

    def evaluate(self, k: int) -> Fraction:
        return sum((c * k ** i for i, c in enumerate(self.coefficients)), Fraction(0))

    def to_dict(self) -> Dict:
        return {
            'k0': self.k0,
            'degree': self.degree,
            'coefficients': [str(c) for c in self.coefficients],
            'confirmations': self.confirmations,
        }


def _differences(values: Sequence[Fraction], order: int) -> List[Fraction]:
    out = list(values)
    for _ in range(order):
        out = [b - a for a, b in zip(out, out[1:])]
    return out


def _to_fraction(value) -> Fraction:
    r = sympy.Rational(value)
    return Fraction(int(r.p), int(r.q))


def fit_eventual_polynomial(samples: Sequence, d_max: int, margin: int = 5) -> GrowthFit:
    """Least degree, then least onset, whose next differences vanish with ``margin`` confirmations"""
    values = [Fraction(s) for s in samples]
    if len(values) < d_max + margin + 2:
        raise InputValidationError(
            f"need at least {d_max + margin + 2} samples for degree {d_max} with margin {margin}",
            samples=len(values))
    for d in range(d_max + 1):
        diffs = _differences(values, d + 1)
        nonzero = [j for j, x in enumerate(diffs) if x != 0]
        k0 = nonzero[-1] + 1 if nonzero else 0
        confirmations = len(diffs) - k0
        if confirmations < margin:
            continue
        points = [(k0 + i, sympy.Rational(values[k0 + i].numerator, values[k0 + i].denominator))
                  for i in range(d + 1)]
        poly = sympy.Poly(sympy.interpolate(points, K), K)
        coefficients = [_to_fraction(c) for c in reversed(poly.all_coeffs())]
        coefficients += [Fraction(0)] * (d + 1 - len(coefficients))
        return GrowthFit(k0, d, tuple(coefficients[:d + 1]), confirmations)
    raise NoPolynomialWithinWindow(f"no polynomial of degree ≤ {d_max} fits the samples",
                                   samples=[str(v) for v in values[:12]])


def growth_samples(T: SimplicialTree, phi: Automorphism, w: Word, window: int) -> List[Fraction]:
    """ℓ_T(φ^k(w)) for k = 0..window-1"""
    c = CyclicWord.of(w)
    out = []
    for _ in range(window):
        out.append(T.translation_length(c))
        c = phi.apply_to_class(c)
    return out


def path_growth_samples(f: TriangularMap, p: EdgePath, window: int) -> List[Fraction]:
    """Lengths of the tightened iterates [f^k(p)] in f's host"""
    host = f.graph
    return [host.path_length(iterate(f, p, k)) for k in range(window)]


@dataclass(frozen=True)
class LengthFunction:
    values: Dict[CyclicWord, Fraction]
    degree: int
    fits: Dict[CyclicWord, GrowthFit] = field(default_factory=dict)

    def __call__(self, w) -> Fraction:
        return self.values[class_key(w)]

    def elliptic(self) -> List[CyclicWord]:
        return sorted(c for c, v in self.values.items() if v == 0)

    def to_dict(self) -> Dict:
        return {
            'degree': self.degree,
            'values': {str(c): str(v) for c, v in sorted(self.values.items())},
            'fits': {str(c): fit.to_dict() for c, fit in sorted(self.fits.items())},
        }


def suffix_words(f: TriangularMap) -> List[Tuple[int, Word]]:
    """(edge, word) for every nontrivial suffix, in filtration order"""
    host = f.graph
    out = []
    for e in host.filtration:
        u = f.suffixes[e]
        if u:
            loop = host.concat(host.tree_paths[u.start], u, host.reverse(host.tree_paths[u.start]))
            out.append((e, host.loop_to_word(loop)))
    return out


def edge_markings(f: TriangularMap) -> List[Word]:
    host = f.graph
    return [host.mu[e] for e in host.non_tree_edges]


def probe_words(queries: Sequence[Word], f: Optional[TriangularMap] = None) -> List[Word]:
    """Queries, edge markings and suffixes, plus their pairwise products, one per class"""
    base = list(queries)
    if f is not None:
        base += edge_markings(f) + [w for _, w in suffix_words(f)]
    seen: Dict[CyclicWord, Word] = {}
    for w in base:
        if w:
            seen.setdefault(class_key(w), w)
    singles = list(seen.values())
    for i, u in enumerate(singles):
        for v in singles[i + 1:]:
            product = u * v
            if product:
                seen.setdefault(class_key(product), product)
    return list(seen.values())


def limit_lengths(T: SimplicialTree, phi: Automorphism, probes: Sequence[Word],
                  config: RunConfig) -> LengthFunction:
    """Normalized limit of ℓ_T(φ^k(w)) on each probe"""
    d_max = config.d_max if config.d_max is not None else T.rank
    window = max(config.window, d_max + config.margin + 2)
    fits: Dict[CyclicWord, GrowthFit] = {}
    for w in probes:
        key = class_key(w)
        if key in fits:
            continue
        samples = growth_samples(T, phi, w, window)
        try:
            fits[key] = fit_eventual_polynomial(samples, d_max, config.margin)
        except NoPolynomialWithinWindow as exc:
            raise NoPolynomialWithinWindow(str(exc), query=str(w)) from exc
    degree = max((fit.degree for fit in fits.values()), default=0)
    values = {key: (fit.leading if fit.degree == degree else Fraction(0)) for key, fit in fits.items()}
    log_search(LogCategory.GROWTH, 'limit', f"limit of {len(fits)} probes has degree {degree}",
               degree=degree)
    return LengthFunction(values, degree, fits)


def limit_length_function(T: SimplicialTree, f: TriangularMap, queries: Sequence[Word],
                          config: RunConfig = None) -> LengthFunction:
    config = (config or RunConfig()).for_rank(T.rank)
    phi = induced_automorphism(f)
    return limit_lengths(T, phi, probe_words(queries, f), config)


@dataclass(frozen=True)
class GrowthClass:
    grower: bool
    witness: Optional[Word] = None
    witness_edge: Optional[int] = None

    @property
    def label(self) -> str:
        return "Grower(linear)" if self.grower else "NonGrower"

    def to_dict(self) -> Dict:
        return {'classification': self.label,
                'witness': str(self.witness) if self.witness is not None else None}


def classify_tree_growth(T: SimplicialTree, f: TriangularMap, iterate_checks: int = 3) -> GrowthClass:
    """Grower iff some suffix is hyperbolic in T"""
    suffixes = suffix_words(f)
    for e, u in suffixes:
        if T.translation_length(u) > 0:
            get_logger().debug(LogCategory.GROWTH, 'classify', f"suffix {u} of edge {e} is hyperbolic")
            return GrowthClass(True, u, e)
    phi = induced_automorphism(f)
    for e, u in suffixes:
        c = CyclicWord.of(u)
        for _ in range(iterate_checks):
            c = phi.apply_to_class(c)
            if T.translation_length(c) > 0:
                raise HypothesisUnverified("an iterate of an elliptic suffix is hyperbolic",
                                           edge=e, suffix=str(u))
    words = [u for _, u in suffixes]
    for i, u in enumerate(words):
        for v in words[i + 1:]:
            if T.translation_length(u * v) > 0:
                raise HypothesisUnverified("elliptic suffixes have no common fixed point",
                                           suffixes=[str(u), str(v)])
    return GrowthClass(False)


def limit_edge_stabilizer_candidates(T: SimplicialTree, f: TriangularMap) -> List[Word]:
    """Fixed suffixes that are hyperbolic in T, one per class"""
    out: Dict[CyclicWord, Word] = {}
    for e, u in suffix_words(f):
        if T.translation_length(u) > 0 and is_nielsen(f, f.suffixes[e]):
            out.setdefault(class_key(u), u)
    return list(out.values())
