"""Reduced words in finitely generated free groups.

Words are stored run-length style as ``((generator, exponent), ...)`` with
nonzero exponents and no two adjacent syllables on the same generator.
Endomorphisms are given by the images of the generators (:class:`FreeMap`).
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Alphabet",
    "Word",
    "FreeMap",
    "AlphabetMismatch",
    "reduce",
    "invert",
    "concat",
    "commutator",
    "apply_map",
    "compose",
    "identity_map",
    "inner",
    "exponent_vector",
    "evaluate_word",
    "evaluate_phi_word",
    "random_word",
    "XY",
    "AB",
    "UVW",
    "UW",
]


class AlphabetMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if not self.names:
            raise ValueError("alphabet must have at least one generator")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate generator names in {self.names}")

    @property
    def size(self) -> int:
        return len(self.names)

    is_free = True

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValueError(f"unknown generator {name!r} for alphabet {self.names}") from None

    def gen(self, i: int | str) -> "Word":
        if isinstance(i, str):
            i = self.index(i)
        return Word(self, ((i, 1),))

    def gens(self) -> tuple["Word", ...]:
        return tuple(self.gen(i) for i in range(self.size))

    def identity(self) -> "Word":
        return Word(self, ())

    def make(self, syllables: Iterable[tuple[int, int]]) -> "Word":
        return reduce(syllables, self)

    def parse(self, text: str) -> "Word":
        return Word.parse(text, self)

    def __str__(self):
        return "<" + ",".join(self.names) + ">"


_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z_0-9']*?)(?:\^\(?(-?\d+)\)?)?$")


def _push(stack: list, g: int, e: int) -> None:
    # Free reduction: merge with the top syllable, popping on cancellation.
    if stack and stack[-1][0] == g:
        e += stack[-1][1]
        stack.pop()
        if e:
            stack.append((g, e))
    elif e:
        stack.append((g, e))


class Word:
    """A freely reduced word over an :class:`Alphabet`. Immutable."""

    __slots__ = ("alphabet", "syllables", "_hash")

    def __init__(self, alphabet: Alphabet, syllables: tuple[tuple[int, int], ...] = ()):
        # Trusted constructor: callers guarantee reduction. Use reduce() otherwise.
        self.alphabet = alphabet
        self.syllables = syllables
        self._hash = None

    @classmethod
    def parse(cls, text: str, alphabet: Alphabet) -> "Word":
        text = text.strip()
        if text in ("", "1", "e", "ε"):
            return alphabet.identity()
        raw = []
        for tok in text.replace("*", " ").split():
            m = _TOKEN.match(tok)
            if not m:
                raise ValueError(f"cannot parse token {tok!r}")
            name, exp = m.group(1), m.group(2)
            raw.append((alphabet.index(name), int(exp) if exp is not None else 1))
        return reduce(raw, alphabet)

    def __len__(self) -> int:
        return sum(abs(e) for _, e in self.syllables)

    def letters(self) -> Iterator[tuple[int, int]]:
        """Iterate as (generator, +1/-1) letters."""
        for g, e in self.syllables:
            s = 1 if e > 0 else -1
            for _ in range(abs(e)):
                yield (g, s)

    def is_identity(self) -> bool:
        return not self.syllables

    def inverse(self) -> "Word":
        return Word(self.alphabet, tuple((g, -e) for g, e in reversed(self.syllables)))

    __invert__ = inverse

    def _check(self, other: "Word") -> None:
        if not isinstance(other, Word) or other.alphabet != self.alphabet:
            raise AlphabetMismatch(f"cannot combine words over {self.alphabet} and {getattr(other, 'alphabet', other)}")

    def __mul__(self, other: "Word") -> "Word":
        self._check(other)
        if not other.syllables:
            return self
        if not self.syllables:
            return other
        stack = list(self.syllables)
        for g, e in other.syllables:
            _push(stack, g, e)
        return Word(self.alphabet, tuple(stack))

    def __pow__(self, k: int) -> "Word":
        if k < 0:
            return self.inverse() ** (-k)
        out = self.alphabet.identity()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self, g: "Word") -> "Word":
        """g^-1 * self * g."""
        return g.inverse() * self * g

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.alphabet == other.alphabet and self.syllables == other.syllables

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.alphabet.names, self.syllables))
        return self._hash

    def __str__(self) -> str:
        if not self.syllables:
            return "1"
        names = self.alphabet.names
        return " ".join(names[g] if e == 1 else f"{names[g]}^{e}" for g, e in self.syllables)

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"


def reduce(raw: Iterable[tuple[int, int]], alphabet: Alphabet) -> Word:
    """Freely reduce a sequence of (generator, exponent) pairs."""
    stack: list = []
    n = alphabet.size
    for g, e in raw:
        if not (isinstance(g, int) and 0 <= g < n):
            raise ValueError(f"invalid generator index {g!r} for alphabet of size {n}")
        _push(stack, g, int(e))
    return Word(alphabet, tuple(stack))


def invert(w: Word) -> Word:
    return w.inverse()


def concat(w1: Word, w2: Word) -> Word:
    return w1 * w2


def commutator(w1: Word, w2: Word) -> Word:
    """[w1, w2] = w1 w2 w1^-1 w2^-1."""
    w1._check(w2)
    return w1 * w2 * w1.inverse() * w2.inverse()


def exponent_vector(w: Word, k: int = 0) -> tuple[int, ...]:
    """Exponent sums per generator; reduced mod k when k > 0."""
    v = [0] * w.alphabet.size
    for g, e in w.syllables:
        v[g] += e
    if k:
        v = [c % k for c in v]
    return tuple(v)


@dataclass(frozen=True)
class FreeMap:
    """Homomorphism between free groups given by generator images."""

    domain: Alphabet
    codomain: Alphabet
    images: tuple[Word, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        if len(self.images) != self.domain.size:
            raise ValueError("need one image per domain generator")
        for im in self.images:
            if im.alphabet != self.codomain:
                raise AlphabetMismatch(f"image {im} not over codomain {self.codomain}")

    @classmethod
    def from_strings(cls, domain: Alphabet, codomain: Alphabet, images: Sequence[str]) -> "FreeMap":
        return cls(domain, codomain, tuple(codomain.parse(s) for s in images))

    @cached_property
    def _inv_images(self) -> tuple[Word, ...]:
        return tuple(im.inverse() for im in self.images)

    def __call__(self, w: Word) -> Word:
        return apply_map(self, w)

    def __matmul__(self, other: "FreeMap") -> "FreeMap":
        return compose(self, other)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{n} -> {im}" for n, im in zip(self.domain.names, self.images)) + "}"


def apply_map(m: FreeMap, w: Word) -> Word:
    if w.alphabet != m.domain:
        raise AlphabetMismatch(f"word over {w.alphabet}, map domain {m.domain}")
    stack: list = []
    ims, invs = m.images, m._inv_images
    for g, e in w.syllables:
        src = ims[g] if e > 0 else invs[g]
        for _ in range(abs(e)):
            for h, f in src.syllables:
                _push(stack, h, f)
    return Word(m.codomain, tuple(stack))


def compose(m1: FreeMap, m2: FreeMap) -> FreeMap:
    """m1 after m2: apply m2 first."""
    if m2.codomain != m1.domain:
        raise AlphabetMismatch("m2's codomain must equal m1's domain")
    return FreeMap(m2.domain, m1.codomain, tuple(apply_map(m1, im) for im in m2.images))


def identity_map(alphabet: Alphabet) -> FreeMap:
    return FreeMap(alphabet, alphabet, alphabet.gens())


def inner(g: Word) -> FreeMap:
    """Conjugation h -> g^-1 h g.

    This right-conjugation convention makes the generator formulas of the
    push-map and quotient actions come out as stated; with it,
    inner(f) @ inner(g) == inner(g * f).
    """
    A = g.alphabet
    return FreeMap(A, A, tuple(h.conjugate(g) for h in A.gens()))


def evaluate_word(w: Word, images: Sequence, inverses: Sequence | None = None, identity=None):
    """Substitute ``images[i]`` for generator i and multiply out.

    Images may be words (result: their product) or FreeMaps (result: the
    composite, leftmost letter applied last).  Negative letters need
    ``inverses`` unless the images are words.
    """
    if len(images) != w.alphabet.size:
        raise ValueError("need one image per generator")
    first = images[0]
    if isinstance(first, Word):
        out = identity if identity is not None else first.alphabet.identity()
        for g, e in w.syllables:
            out = out * images[g] ** e
        return out
    if identity is None:
        identity = identity_map(first.domain)
    out = identity
    for g, e in w.syllables:
        if e < 0 and inverses is None:
            raise ValueError("inverse images required for negative exponents")
        f = images[g] if e > 0 else inverses[g]
        for _ in range(abs(e)):
            out = compose(out, f)
    return out


def evaluate_phi_word(w: Word, images: Sequence, inverses: Sequence | None = None):
    """Evaluate a word over {a, b} at images for a and b (words or maps)."""
    return evaluate_word(w, images, inverses)


def random_word(alphabet: Alphabet, length: int, rng: random.Random) -> Word:
    """Uniform random reduced word of exactly the given letter length."""
    n = alphabet.size
    letters: list = []
    prev = None
    for _ in range(length):
        while True:
            g, s = rng.randrange(n), rng.choice((1, -1))
            if prev != (g, -s):
                break
        letters.append((g, s))
        prev = (g, s)
    return reduce(letters, alphabet)


XY = Alphabet(("x", "y"))
AB = Alphabet(("a", "b"))
UVW = Alphabet(("u", "v", "w"))
UW = Alphabet(("ubar", "wbar"))
