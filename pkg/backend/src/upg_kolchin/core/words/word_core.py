# core/words/word_core.py - Reduced words, cyclic words and free-group arithmetic

"""
Words in a free group F_n.

Letters are signed generator indices: ``+i`` is the i-th generator (1-based)
and ``-i`` its inverse. Textually a generator is a lower-case symbol and its
inverse the upper-case one (``a`` and ``A``); the empty word is ``""``.
"""

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator, List, Sequence, Tuple

from ...utils.error_handler import InputValidationError, UnknownGeneratorError

ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def free_reduce(letters: Iterable[int]) -> Tuple[int, ...]:
    """Freely reduce a raw letter sequence with a stack"""
    stack: List[int] = []
    for letter in letters:
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


@dataclass(frozen=True)
class Word:
    """A freely reduced word; construction always reduces."""

    letters: Tuple[int, ...] = ()

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        if any(x == 0 for x in letters):
            raise UnknownGeneratorError("letter 0 is not a generator")
        object.__setattr__(self, 'letters', free_reduce(letters))

    @classmethod
    def parse(cls, text: str, basis: 'Basis' = None) -> 'Word':
        return (basis or Basis.standard(_rank_of(text))).parse(text)

    @classmethod
    def generator(cls, index: int) -> 'Word':
        return cls((index,))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self.letters[item])
        return self.letters[item]

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __mul__(self, other: 'Word') -> 'Word':
        return Word(self.letters + other.letters)

    def __invert__(self) -> 'Word':
        return Word(tuple(-x for x in reversed(self.letters)))

    def __pow__(self, k: int) -> 'Word':
        base = self if k >= 0 else ~self
        return Word(base.letters * abs(k))

    def is_identity(self) -> bool:
        return not self.letters

    def max_index(self) -> int:
        return max((abs(x) for x in self.letters), default=0)

    def exponent_sums(self, rank: int) -> List[int]:
        sums = [0] * rank
        for x in self.letters:
            sums[abs(x) - 1] += 1 if x > 0 else -1
        return sums

    def conjugate(self, g: 'Word') -> 'Word':
        """g⁻¹·w·g"""
        return ~g * self * g

    def format(self, basis: 'Basis' = None) -> str:
        return (basis or Basis.standard(max(self.max_index(), 1))).format(self.letters)

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"Word({self.format()!r})"


def letter_key(letter: int) -> int:
    """Order a < A < b < B < ..."""
    return 2 * letter - 2 if letter > 0 else -2 * letter - 1


@dataclass(frozen=True, eq=False)
class CyclicWord:
    """A conjugacy class, stored as a cyclically reduced representative.

    Equality and hashing use the least rotation under :func:`letter_key`.
    """

    letters: Tuple[int, ...] = ()
    canonical: Tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        c, _ = cyclic_reduce(Word(self.letters))
        object.__setattr__(self, "letters", c.letters)
        object.__setattr__(self, "canonical", c.canonical)

    @classmethod
    def of(cls, w: Word) -> 'CyclicWord':
        return cls(w.letters)

    @classmethod
    def parse(cls, text: str, basis: 'Basis' = None) -> 'CyclicWord':
        return cls(Word.parse(text, basis).letters)

    def __eq__(self, other) -> bool:
        return isinstance(other, CyclicWord) and self.canonical == other.canonical

    def __hash__(self) -> int:
        return hash(self.canonical)

    def __lt__(self, other: 'CyclicWord') -> bool:
        return (len(self), [letter_key(x) for x in self.canonical]) < \
            (len(other), [letter_key(x) for x in other.canonical])

    def __len__(self) -> int:
        return len(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __invert__(self) -> 'CyclicWord':
        return CyclicWord(tuple(-x for x in reversed(self.letters)))

    def word(self) -> Word:
        return Word(self.letters)

    def canonical_word(self) -> Word:
        return Word(self.canonical)

    def rotations(self) -> List[Word]:
        n = len(self.letters)
        return [Word(self.letters[i:] + self.letters[:i]) for i in range(max(n, 1))]

    def format(self, basis: 'Basis' = None) -> str:
        return self.canonical_word().format(basis)

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"CyclicWord({self.format()!r})"


def _least_rotation(letters: Tuple[int, ...]) -> Tuple[int, ...]:
    if not letters:
        return ()
    n = len(letters)
    best = min(range(n), key=lambda i: [letter_key(x) for x in letters[i:] + letters[:i]])
    return letters[best:] + letters[:best]


def cyclic_reduce(w: Word) -> Tuple[CyclicWord, Word]:
    """Split w = conj·c·conj⁻¹ with c cyclically reduced"""
    letters = w.letters
    k = 0
    while 2 * k + 1 < len(letters) and letters[k] == -letters[len(letters) - 1 - k]:
        k += 1
    core = letters[k:len(letters) - k]
    c = object.__new__(CyclicWord)
    object.__setattr__(c, 'letters', core)
    object.__setattr__(c, 'canonical', _least_rotation(core))
    return c, Word(letters[:k])


def primitive_root(w: Word) -> Tuple[Word, int]:
    """Return (r, k) with w = r^k, k ≥ 1 maximal; the identity gives (ε, 1)"""
    if not w:
        return Word(), 1
    c, conj = cyclic_reduce(w)
    core = c.letters
    n = len(core)
    for p in range(1, n + 1):
        if n % p == 0 and core[:p] * (n // p) == core:
            return conj * Word(core[:p]) * ~conj, n // p
    return w, 1


def concat(*words: Word) -> Word:
    out: Tuple[int, ...] = ()
    for w in words:
        out = out + w.letters
    return Word(out)


def invert(w: Word) -> Word:
    return ~w


def word_length(w: Word) -> int:
    return len(w)


def cyclic_length(w: Word) -> int:
    return len(cyclic_reduce(w)[0])


def are_conjugate(u: Word, v: Word) -> bool:
    return CyclicWord.of(u) == CyclicWord.of(v)


def enumerate_words(rank: int, max_length: int) -> Iterator[Word]:
    """All reduced words of length ≤ max_length, shortest first"""
    letters = [x for i in range(1, rank + 1) for x in (i, -i)]
    layer: List[Tuple[int, ...]] = [()]
    yield Word()
    for _ in range(max_length):
        nxt = []
        for w in layer:
            for x in letters:
                if w and w[-1] == -x:
                    continue
                nxt.append(w + (x,))
        for w in nxt:
            yield Word(w)
        layer = nxt


def enumerate_cyclic_words(rank: int, max_length: int) -> List[CyclicWord]:
    """Nontrivial conjugacy classes of cyclic length ≤ max_length, sorted"""
    seen = set()
    for w in enumerate_words(rank, max_length):
        if w and w.letters[0] != -w.letters[-1]:
            seen.add(CyclicWord(w.letters))
    return sorted(seen)


def _rank_of(text: str) -> int:
    return max((ALPHABET.index(ch.lower()) + 1 for ch in text if ch.lower() in ALPHABET), default=1)


@dataclass(frozen=True)
class Basis:
    """Named free basis of F_n"""

    rank: int
    names: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.rank < 1:
            raise InputValidationError(f"rank must be at least 1, got {self.rank}")
        names = tuple(self.names) or tuple(ALPHABET[:self.rank])
        if len(names) != self.rank:
            raise InputValidationError(f"expected {self.rank} generator names, got {len(names)}")
        if len(set(names)) != len(names):
            raise InputValidationError("generator names must be distinct")
        for name in names:
            if len(name) != 1 or not name.islower():
                raise InputValidationError(f"generator name {name!r} must be one lower-case letter")
        object.__setattr__(self, 'names', names)

    @classmethod
    def standard(cls, rank: int) -> 'Basis':
        if rank > len(ALPHABET):
            raise InputValidationError(f"rank {rank} exceeds the {len(ALPHABET)} letter alphabet")
        return cls(rank)

    def parse(self, text: str) -> Word:
        text = text.strip()
        if text in ("", "1", "ε"):
            return Word()
        letters = []
        for ch in text:
            low = ch.lower()
            if low not in self.names:
                raise UnknownGeneratorError(f"unknown generator symbol {ch!r}", word=text)
            index = self.names.index(low) + 1
            letters.append(index if ch == low else -index)
        return Word(tuple(letters))

    def parse_many(self, texts: Sequence[str]) -> List[Word]:
        return [self.parse(t) for t in texts]

    def format(self, letters: Iterable[int]) -> str:
        out = []
        for x in letters:
            if abs(x) > self.rank:
                raise UnknownGeneratorError(f"letter {x} outside rank {self.rank}")
            name = self.names[abs(x) - 1]
            out.append(name if x > 0 else name.upper())
        return "".join(out)

    def generators(self) -> List[Word]:
        return [Word((i,)) for i in range(1, self.rank + 1)]

    def contains(self, w: Word) -> bool:
        return w.max_index() <= self.rank


def all_words_of_length(rank: int, length: int) -> Iterator[Tuple[int, ...]]:
    """Raw (possibly unreduced) letter strings, for reduction property checks"""
    letters = [x for i in range(1, rank + 1) for x in (i, -i)]
    for combo in product(letters, repeat=length):
        yield combo
