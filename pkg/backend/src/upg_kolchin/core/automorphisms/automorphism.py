# core/automorphisms/automorphism.py - Certified automorphisms of F_n

"""
Automorphisms are stored with the images of the basis and a certificate: the
images of the basis under the inverse. Every constructor checks that both
compositions reduce to the identity.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from ...utils.error_handler import CompositionNotIdentity, InputValidationError
from ..words.word_core import Basis, CyclicWord, Word, cyclic_reduce


def substitute(images: Sequence[Word], w: Word) -> Word:
    letters: List[int] = []
    for x in w.letters:
        image = images[abs(x) - 1]
        letters.extend(image.letters if x > 0 else (~image).letters)
    return Word(tuple(letters))


@dataclass(frozen=True)
class Automorphism:
    """x_i ↦ images[i-1], with inverse certificate inverse_images."""

    images: Tuple[Word, ...]
    inverse_images: Tuple[Word, ...]

    def __post_init__(self):
        object.__setattr__(self, 'images', tuple(self.images))
        object.__setattr__(self, 'inverse_images', tuple(self.inverse_images))

    @classmethod
    def validate(cls, images: Sequence[Word], inverse_images: Sequence[Word]) -> 'Automorphism':
        n = len(images)
        if n == 0 or len(inverse_images) != n:
            raise InputValidationError(
                f"need n images and n inverse images, got {len(images)} and {len(inverse_images)}")
        for w in list(images) + list(inverse_images):
            if w.max_index() > n:
                raise InputValidationError(f"word {w} uses a generator outside rank {n}")
        for i in range(1, n + 1):
            x = Word((i,))
            if substitute(images, substitute(inverse_images, x)) != x:
                raise CompositionNotIdentity("images ∘ inverse_images is not the identity", generator=i)
            if substitute(inverse_images, substitute(images, x)) != x:
                raise CompositionNotIdentity("inverse_images ∘ images is not the identity", generator=i)
        return cls(tuple(images), tuple(inverse_images))

    @classmethod
    def parse(cls, images: Sequence[str], inverse_images: Sequence[str],
              basis: Basis = None) -> 'Automorphism':
        basis = basis or Basis.standard(len(images))
        return cls.validate(basis.parse_many(images), basis.parse_many(inverse_images))

    @classmethod
    def identity(cls, rank: int) -> 'Automorphism':
        gens = tuple(Word((i,)) for i in range(1, rank + 1))
        return cls(gens, gens)

    @classmethod
    def inner(cls, rank: int, gamma: Word) -> 'Automorphism':
        """i_γ : w ↦ γ·w·γ⁻¹"""
        gens = [Word((i,)) for i in range(1, rank + 1)]
        return cls(tuple(gamma * x * ~gamma for x in gens),
                   tuple(~gamma * x * gamma for x in gens))

    @property
    def rank(self) -> int:
        return len(self.images)

    def apply(self, w: Word) -> Word:
        return substitute(self.images, w)

    def __call__(self, w: Word) -> Word:
        return self.apply(w)

    def apply_inverse(self, w: Word) -> Word:
        return substitute(self.inverse_images, w)

    def apply_to_class(self, c: CyclicWord) -> CyclicWord:
        return CyclicWord.of(self.apply(c.word()))

    def compose(self, other: 'Automorphism') -> 'Automorphism':
        """self ∘ other"""
        return Automorphism(
            tuple(self.apply(w) for w in other.images),
            tuple(other.apply_inverse(w) for w in self.inverse_images),
        )

    def inverse(self) -> 'Automorphism':
        return Automorphism(self.inverse_images, self.images)

    def power(self, k: int) -> 'Automorphism':
        base = self if k >= 0 else self.inverse()
        out = Automorphism.identity(self.rank)
        for _ in range(abs(k)):
            out = base.compose(out)
        return out

    def abelianization(self) -> sympy.Matrix:
        n = self.rank
        return sympy.Matrix(n, n, lambda i, j: self.images[j].exponent_sums(n)[i])

    def is_identity(self) -> bool:
        return all(w == Word((i + 1,)) for i, w in enumerate(self.images))

    def to_dict(self, basis: Basis = None) -> Dict:
        basis = basis or Basis.standard(self.rank)
        return {
            'rank': self.rank,
            'images': [w.format(basis) for w in self.images],
            'inverse_images': [w.format(basis) for w in self.inverse_images],
        }

    def format(self, basis: Basis = None) -> str:
        basis = basis or Basis.standard(self.rank)
        return ", ".join(f"{basis.names[i]}↦{w.format(basis) or '1'}"
                         for i, w in enumerate(self.images))


def apply(phi: Automorphism, w: Word) -> Word:
    return phi.apply(w)


def compose(phi: Automorphism, psi: Automorphism) -> Automorphism:
    return phi.compose(psi)


def abelianization(phi: Automorphism) -> sympy.Matrix:
    return phi.abelianization()


def inner_conjugator(theta: Automorphism) -> Optional[Word]:
    """γ with θ = i_γ, or None when θ is not inner"""
    n = theta.rank
    x1 = Word((1,))
    c, gamma0 = cyclic_reduce(theta.images[0])
    if c.letters != (1,):
        return None
    if n == 1:
        return Word() if theta.images[0] == x1 else None
    z = ~gamma0 * theta.images[1] * gamma0
    k = 0
    for x in z.letters:
        if x == 1 and k >= 0:
            k += 1
        elif x == -1 and k <= 0:
            k -= 1
        else:
            break
    gamma = gamma0 * x1 ** k
    if all(theta.images[i] == gamma * Word((i + 1,)) * ~gamma for i in range(n)):
        return gamma
    return None


def is_inner(theta: Automorphism) -> bool:
    return inner_conjugator(theta) is not None


def is_outer_equal(phi: Automorphism, psi: Automorphism) -> bool:
    return is_inner(phi.compose(psi.inverse()))


def class_period(phi: Automorphism, c: CyclicWord, max_period: int) -> Optional[int]:
    """Least m ≤ max_period with φ^m[c] = [c]"""
    current = c
    for m in range(1, max_period + 1):
        current = phi.apply_to_class(current)
        if current == c:
            return m
    return None


def periodic_classes(phi: Automorphism, classes: Sequence[CyclicWord],
                     max_period: int) -> Dict[CyclicWord, int]:
    out = {}
    for c in classes:
        period = class_period(phi, c, max_period)
        if period is not None:
            out[c] = period
    return out
