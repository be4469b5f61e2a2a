"""Free products of finite cyclic groups, and the order-2 product of rank 3.

``PSI = <z1> * <z2> * <z3>`` with ``z_i^2 = 1`` contains the free group on
x, y via ``x -> z1 z2``, ``y -> z2 z3`` (image: words with an even number of
letters), and the free group on ``u = z1 z2 z3``, ``v = z2 z3 z1``,
``w = z3 z1 z2`` (words whose per-letter parities are all equal).  The two
automorphisms x -> x, y -> y x^2 and x -> x y^2, y -> y of F lift to PSI
and preserve the second subgroup; the restriction is returned as a map on
the free basis u, v, w.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .words import (
    UVW,
    UW,
    XY,
    Alphabet,
    AlphabetMismatch,
    FreeMap,
    Word,
    compose,
    inner,
)

__all__ = [
    "FPAlphabet",
    "FPWord",
    "FPMap",
    "fp_reduce",
    "PSI",
    "embed_F",
    "epsilon_image",
    "sigma_image",
    "in_theta",
    "in_fprime",
    "rewrite_to_F",
    "rewrite_in_uvw",
    "uvw_to_psi",
    "AUT_A",
    "AUT_B",
    "LIFT_A",
    "LIFT_B",
    "LIFT_A_INV",
    "LIFT_B_INV",
    "UVW_A",
    "UVW_B",
    "kappa0",
    "kill_v",
    "Check",
    "verify_psi_lifts",
    "verify_uvw_action",
    "verify_quotient_inner_action",
    "verify_push_action",
]


@dataclass(frozen=True)
class FPAlphabet:
    """Letters of a free product of cyclic groups of the given orders."""

    names: tuple[str, ...]
    orders: tuple[int, ...]

    is_free = False

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "orders", tuple(int(k) for k in self.orders))
        if not self.names or len(self.names) != len(self.orders):
            raise ValueError("need one order per letter")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate letter names")
        if any(k < 2 for k in self.orders):
            raise ValueError("letter orders must be at least 2")

    @property
    def size(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValueError(f"unknown letter {name!r} for {self.names}") from None

    def gen(self, i: int | str) -> "FPWord":
        if isinstance(i, str):
            i = self.index(i)
        return FPWord(self, ((i, 1),))

    def gens(self) -> tuple["FPWord", ...]:
        return tuple(self.gen(i) for i in range(self.size))

    def identity(self) -> "FPWord":
        return FPWord(self, ())

    def make(self, syllables: Iterable[tuple[int, int]]) -> "FPWord":
        return fp_reduce(syllables, self)

    def parse(self, text: str) -> "FPWord":
        text = text.strip()
        if text in ("", "1", "e", "ε"):
            return self.identity()
        raw = []
        for tok in text.replace("*", " ").split():
            m = _TOKEN.match(tok)
            if not m:
                raise ValueError(f"cannot parse token {tok!r}")
            raw.append((self.index(m.group(1)), int(m.group(2)) if m.group(2) else 1))
        return fp_reduce(raw, self)

    def __str__(self):
        return "<" + ",".join(f"{n}^{k}" for n, k in zip(self.names, self.orders)) + ">"


_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z_0-9']*?)(?:\^\(?(-?\d+)\)?)?$")


def _push(stack: list, g: int, e: int, orders: Sequence[int]) -> None:
    k = orders[g]
    if stack and stack[-1][0] == g:
        e = (e + stack[-1][1]) % k
        stack.pop()
    else:
        e %= k
    if e:
        stack.append((g, e))


class FPWord:
    """Normal form in a free product of cyclic groups. Immutable."""

    __slots__ = ("alphabet", "syllables", "_hash")

    def __init__(self, alphabet: FPAlphabet, syllables: tuple[tuple[int, int], ...] = ()):
        self.alphabet = alphabet
        self.syllables = syllables
        self._hash = None

    def __len__(self) -> int:
        return len(self.syllables)

    def is_identity(self) -> bool:
        return not self.syllables

    def inverse(self) -> "FPWord":
        orders = self.alphabet.orders
        return FPWord(self.alphabet, tuple((g, orders[g] - e) for g, e in reversed(self.syllables)))

    __invert__ = inverse

    def _check(self, other) -> None:
        if not isinstance(other, FPWord) or other.alphabet != self.alphabet:
            raise AlphabetMismatch("cannot combine words over different free products")

    def __mul__(self, other: "FPWord") -> "FPWord":
        self._check(other)
        if not other.syllables:
            return self
        if not self.syllables:
            return other
        stack = list(self.syllables)
        orders = self.alphabet.orders
        for g, e in other.syllables:
            _push(stack, g, e, orders)
        return FPWord(self.alphabet, tuple(stack))

    def __pow__(self, k: int) -> "FPWord":
        if k < 0:
            return self.inverse() ** (-k)
        out, base = self.alphabet.identity(), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self, g: "FPWord") -> "FPWord":
        return g.inverse() * self * g

    def __eq__(self, other) -> bool:
        return isinstance(other, FPWord) and self.alphabet == other.alphabet and self.syllables == other.syllables

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
        return f"FPWord({str(self)!r})"


def fp_reduce(raw: Iterable[tuple[int, int]], alphabet: FPAlphabet) -> FPWord:
    """Normal form of a product of letter powers."""
    stack: list = []
    n, orders = alphabet.size, alphabet.orders
    for g, e in raw:
        if not (isinstance(g, int) and 0 <= g < n):
            raise ValueError(f"invalid letter index {g!r}")
        _push(stack, g, int(e), orders)
    return FPWord(alphabet, tuple(stack))


@dataclass(frozen=True)
class FPMap:
    """Homomorphism from a free group or free product into a free product."""

    domain: object
    codomain: FPAlphabet
    images: tuple[FPWord, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        if len(self.images) != self.domain.size:
            raise ValueError("need one image per domain letter")
        for im in self.images:
            if im.alphabet != self.codomain:
                raise AlphabetMismatch(f"image {im} not over {self.codomain}")
        if not self.domain.is_free:
            for g, im in enumerate(self.images):
                if not (im ** self.domain.orders[g]).is_identity():
                    raise ValueError(f"image of {self.domain.names[g]} has order not dividing {self.domain.orders[g]}")

    @classmethod
    def from_strings(cls, domain, codomain: FPAlphabet, images: Sequence[str]) -> "FPMap":
        return cls(domain, codomain, tuple(codomain.parse(s) for s in images))

    @cached_property
    def _inv_images(self):
        return tuple(im.inverse() for im in self.images)

    def __call__(self, w) -> FPWord:
        return apply_fp_map(self, w)

    def __matmul__(self, other: "FPMap") -> "FPMap":
        if other.codomain != self.domain:
            raise AlphabetMismatch("codomain/domain mismatch")
        return FPMap(other.domain, self.codomain, tuple(self(im) for im in other.images))

    def __str__(self):
        return "{" + ", ".join(f"{n} -> {im}" for n, im in zip(self.domain.names, self.images)) + "}"


def apply_fp_map(m: FPMap, w) -> FPWord:
    if w.alphabet != m.domain:
        raise AlphabetMismatch("word not over the map's domain")
    stack: list = []
    orders = m.codomain.orders
    ims, invs = m.images, m._inv_images
    for g, e in w.syllables:
        src = ims[g] if e > 0 else invs[g]
        for _ in range(abs(e)):
            for h, f in src.syllables:
                _push(stack, h, f, orders)
    return FPWord(m.codomain, tuple(stack))


# ---------------------------------------------------------------------------
# the rank-3 product of involutions and its two free subgroups

PSI = FPAlphabet(("z1", "z2", "z3"), (2, 2, 2))
_Z1, _Z2, _Z3 = PSI.gens()
_U, _V, _W = _Z1 * _Z2 * _Z3, _Z2 * _Z3 * _Z1, _Z3 * _Z1 * _Z2

_EMBED = FPMap(XY, PSI, (_Z1 * _Z2, _Z2 * _Z3))
_UVW_EMBED = FPMap(UVW, PSI, (_U, _V, _W))


def embed_F(w: Word) -> FPWord:
    """x -> z1 z2, y -> z2 z3."""
    return _EMBED(w)


def uvw_to_psi(w: Word) -> FPWord:
    return _UVW_EMBED(w)


def epsilon_image(w: FPWord) -> tuple[int, int, int]:
    """Parity of the number of occurrences of each z_i."""
    if w.alphabet != PSI:
        raise AlphabetMismatch("epsilon is defined on PSI only")
    v = [0, 0, 0]
    for g, _ in w.syllables:
        v[g] ^= 1
    return tuple(v)


def sigma_image(w: FPWord) -> int:
    return sum(epsilon_image(w)) % 2


def in_theta(w: FPWord) -> bool:
    return sigma_image(w) == 0


def in_fprime(w: FPWord) -> bool:
    e = epsilon_image(w)
    return e[0] == e[1] == e[2]


def _tables():
    # Built lazily to avoid an import cycle with schreier.
    from .schreier import FiniteGroup, PermGroup, coset_table_from_hom

    theta = coset_table_from_hom(PermGroup([[1, 0]] * 3), PSI, label="Theta")
    # (Z/2)^3 modulo the diagonal, as pairs: z1 -> (1,0), z2 -> (0,1), z3 -> (1,1)
    k4 = FiniteGroup([(1, 0), (0, 1), (1, 1)], lambda a, b: (a[0] ^ b[0], a[1] ^ b[1]), (0, 0),
                     inv=lambda a: a, order=4)
    fprime = coset_table_from_hom(k4, PSI, label="F'")
    return theta, fprime


@dataclass
class _Rewriters:
    theta: object
    fprime: object
    theta_images: tuple
    fprime_images: tuple


_REW: _Rewriters | None = None


def _rewriters() -> _Rewriters:
    global _REW
    if _REW is None:
        theta, fprime = _tables()
        to_free = {
            "z2 z1": XY.parse("x^-1"),
            "z3 z1": XY.parse("y^-1 x^-1"),
            "z1 z2": XY.parse("x"),
            "z1 z3": XY.parse("x y"),
        }
        th = tuple(to_free[str(theta.schreier_word(j))] for j in range(theta.rank))
        to_uvw = {str(uvw_to_psi(g)): g for g in UVW.gens()}
        to_uvw.update({str(uvw_to_psi(g.inverse())): g.inverse() for g in UVW.gens()})
        fp = tuple(to_uvw[str(fprime.schreier_word(j))] for j in range(fprime.rank))
        _REW = _Rewriters(theta, fprime, th, fp)
    return _REW


def _substitute(w: Word, images: Sequence[Word], target: Alphabet) -> Word:
    stack: list = []
    from .words import _push as push
    for g, e in w.syllables:
        src = images[g] if e > 0 else images[g].inverse()
        for _ in range(abs(e)):
            for h, f in src.syllables:
                push(stack, h, f)
    return Word(target, tuple(stack))


def rewrite_to_F(w: FPWord) -> Word:
    """Inverse of embed_F on its image (even-length words)."""
    r = _rewriters()
    end, y = r.theta.rewrite(w)
    if end != 0:
        raise ValueError(f"{w} has odd length, so it is not in the image of F")
    return _substitute(y, r.theta_images, XY)


def rewrite_in_uvw(w: FPWord) -> Word:
    """Express an element with constant parity vector in the basis u, v, w."""
    r = _rewriters()
    end, y = r.fprime.rewrite(w)
    if end != 0:
        raise ValueError(f"{w} has non-constant parity vector {epsilon_image(w)}")
    return _substitute(y, r.fprime_images, UVW)


# ---------------------------------------------------------------------------
# automorphisms

AUT_A = FreeMap.from_strings(XY, XY, ["x", "y x^2"])
AUT_B = FreeMap.from_strings(XY, XY, ["x y^2", "y"])
AUT_A_INV = FreeMap.from_strings(XY, XY, ["x", "y x^-2"])
AUT_B_INV = FreeMap.from_strings(XY, XY, ["x y^-2", "y"])

_X, _Y = _Z1 * _Z2, _Z2 * _Z3


def _conj(h: FPWord, g: FPWord) -> FPWord:
    return g.inverse() * h * g


LIFT_A = FPMap(PSI, PSI, (_conj(_Z1, _X), _conj(_Z2, _X), _conj(_Z3, _X * _X)))
LIFT_B = FPMap(PSI, PSI, (_Z1, _conj(_Z2, _Y), _conj(_Z3, _Y)))
LIFT_A_INV = FPMap(PSI, PSI, (_conj(_Z1, _X.inverse()), _conj(_Z2, _X.inverse()), _conj(_Z3, (_X * _X).inverse())))
LIFT_B_INV = FPMap(PSI, PSI, (_Z1, _conj(_Z2, _Y.inverse()), _conj(_Z3, _Y.inverse())))

# Restrictions to the u, v, w subgroup.
UVW_A = FreeMap.from_strings(UVW, UVW, ["w^-1 u w", "v", "w^-1 u^-1 w u w"])
UVW_B = FreeMap.from_strings(UVW, UVW, ["u", "v", "u^-1 v^-1 w v u"])


def kappa0(w: Word) -> FreeMap:
    """a -> UVW_A, b -> UVW_B on words over {a, b}; a map of F(u, v, w)."""
    from .words import evaluate_phi_word
    inv_a = _invert_uvw(UVW_A)
    inv_b = _invert_uvw(UVW_B)
    return evaluate_phi_word(w, (UVW_A, UVW_B), (inv_a, inv_b))


_UVW_INV: dict = {}


def _invert_uvw(m: FreeMap) -> FreeMap:
    # Inverse of a restricted lift, obtained by restricting the inverse lift.
    if id(m) not in _UVW_INV:
        lift_inv = {id(UVW_A): LIFT_A_INV, id(UVW_B): LIFT_B_INV}[id(m)]
        _UVW_INV[id(m)] = FreeMap(UVW, UVW, tuple(rewrite_in_uvw(lift_inv(uvw_to_psi(g))) for g in UVW.gens()))
    return _UVW_INV[id(m)]


_KILL = FreeMap.from_strings(UVW, UW, ["ubar", "1", "wbar"])


def kill_v(w: Word) -> Word:
    """Quotient F(u, v, w) -> F(ubar, wbar) by the normal closure of v."""
    return _KILL(w)


def _mod_v(m: FreeMap) -> FreeMap:
    return FreeMap(UW, UW, (kill_v(m.images[0]), kill_v(m.images[2])))


# ---------------------------------------------------------------------------
# symbolic checks


@dataclass
class Check:
    claim: str
    lhs: str
    rhs: str
    passed: bool

    def to_json(self) -> dict:
        return {"claim": self.claim, "lhs": self.lhs, "rhs": self.rhs, "pass": self.passed}


def _eq(claim: str, lhs, rhs) -> Check:
    return Check(claim, str(lhs), str(rhs), lhs == rhs)


def verify_psi_lifts() -> list[Check]:
    """The two lifts are well-defined automorphisms of PSI extending AUT_A, AUT_B."""
    out = []
    for name, m in (("lift_a", LIFT_A), ("lift_b", LIFT_B)):
        for i, im in enumerate(m.images):
            out.append(_eq(f"{name}(z{i + 1}) is an involution", im * im, PSI.identity()))
    out.append(_eq("lift_a fixes z1 z2", LIFT_A(_X), _X))
    out.append(_eq("lift_b fixes z2 z3", LIFT_B(_Y), _Y))
    out.append(_eq("lift_a(z2 z3) = (z2 z3)(z1 z2)^2", LIFT_A(_Y), _Y * _X * _X))
    # surjectivity: explicit preimages of the generators
    pre_a = (_conj(_Z1, _X.inverse()), _conj(_Z2, _X.inverse()), _conj(_Z3, (_X * _X).inverse()))
    pre_b = (_Z1, _conj(_Z2, _Y.inverse()), _conj(_Z3, _Y.inverse()))
    for name, m, pre in (("lift_a", LIFT_A, pre_a), ("lift_b", LIFT_B, pre_b)):
        for i, p in enumerate(pre):
            out.append(_eq(f"{name}({p}) = z{i + 1}", m(p), PSI.gens()[i]))
    for name, lift, aut in (("lift_a", LIFT_A, AUT_A), ("lift_b", LIFT_B, AUT_B)):
        for g in XY.gens():
            out.append(_eq(f"{name} extends its F-automorphism on {g}", lift(embed_F(g)), embed_F(aut(g))))
    for name, m, mi in (("lift_a", LIFT_A, LIFT_A_INV), ("lift_b", LIFT_B, LIFT_B_INV)):
        for i, z in enumerate(PSI.gens()):
            out.append(_eq(f"{name} inverse on z{i + 1}", m(mi(z)), z))
    return out


def verify_uvw_action() -> list[Check]:
    """Both lifts preserve the u, v, w subgroup and act by UVW_A, UVW_B."""
    out = []
    for name, lift, target in (("lift_a", LIFT_A, UVW_A), ("lift_b", LIFT_B, UVW_B)):
        for g, want in zip(UVW.gens(), target.images):
            img = lift(uvw_to_psi(g))
            ok = in_fprime(img)
            got = rewrite_in_uvw(img) if ok else None
            out.append(Check(f"{name}({g})", str(got), str(want), ok and got == want))
    return out


def verify_quotient_inner_action() -> list[Check]:
    """Modulo v the two restricted maps are conjugations by ubar wbar and ubar."""
    ubar_wbar = UW.parse("ubar wbar")
    ubar = UW.parse("ubar")
    return [
        _eq("UVW_A mod v = inner(ubar wbar)", _mod_v(UVW_A), inner(ubar_wbar)),
        _eq("UVW_B mod v = inner(ubar)", _mod_v(UVW_B), inner(ubar)),
    ]


def push_action_table() -> FreeMap:
    """inner(u^-1 v^-1) composed after UVW_B."""
    return compose(inner(UVW.parse("u^-1 v^-1")), UVW_B)


def verify_push_action() -> tuple[list[Check], dict]:
    """Compare the push-map action with the restricted lifts.

    The a-action is UVW_A itself; the b-action differs from UVW_B by an
    inner automorphism, so the two become conjugate (not equal) after
    killing v.  Returns checks plus the emitted b-action table.
    """
    g = UVW.parse("u^-1 v^-1")
    t = push_action_table()
    out = []
    expected = FreeMap.from_strings(UVW, UVW, ["v u v^-1", "v u v u^-1 v^-1", "w"])
    out.append(_eq("inner(u^-1 v^-1) after UVW_B", t, expected))
    out.append(_eq("differs from UVW_B by inner(u^-1 v^-1)", compose(inner(g.inverse()), t), UVW_B))
    tm, bm = _mod_v(t), _mod_v(UVW_B)
    ubar = UW.parse("ubar")
    out.append(_eq("mod v: b-action = inner(ubar^-1) after inner(ubar)", tm, compose(inner(ubar.inverse()), bm)))
    out.append(_eq("mod v: b-action is the identity (Out-trivial twist of inner(ubar))", tm, FreeMap(UW, UW, UW.gens())))
    table = {str(gen): str(im) for gen, im in zip(UVW.gens(), t.images)}
    return out, table
