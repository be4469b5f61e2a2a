"""Integer 2x2 matrices: abelianized automorphisms and the level-2 free subgroup.

``theta(m)`` has as column j the exponent vector of m(x_j); with this
convention theta(m1 @ m2) = theta(m1) theta(m2).  The subgroup generated by
A = [[1,2],[0,1]] and B = [[1,0],[2,1]] (free, index 12 in SL2(Z)) is
decided by greedy Euclid-style peeling, which also recovers the word.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

from .schreier import FiniteGroup, coset_table_from_hom
from .words import AB, XY, Alphabet, FreeMap, Word, evaluate_phi_word, exponent_vector

__all__ = [
    "Mat2",
    "SanovWord",
    "NotMember",
    "theta",
    "mat_mul",
    "mat_inv",
    "MA",
    "MB",
    "IDENTITY",
    "sanov_membership",
    "congruence_check",
    "verify_level4_in_sanov",
    "gamma_K0_test",
    "gamma_K0_by_words",
    "verify_homology_action",
    "reduced_words",
    "verify_sanov_round_trip",
    "verify_theta_nu0_injective",
    "random_automorphism",
    "verify_level4_criterion",
]

Mat2 = tuple  # ((a, b), (c, d)) with Python ints

IDENTITY: Mat2 = ((1, 0), (0, 1))
MA: Mat2 = ((1, 2), (0, 1))
MB: Mat2 = ((1, 0), (2, 1))


def mat_mul(m: Mat2, n: Mat2) -> Mat2:
    (a, b), (c, d) = m
    (e, f), (g, h) = n
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def det(m: Mat2) -> int:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def mat_inv(m: Mat2) -> Mat2:
    dt = det(m)
    if dt not in (1, -1):
        raise ValueError(f"{m} is not invertible over Z")
    (a, b), (c, d) = m
    return ((d * dt, -b * dt), (-c * dt, a * dt))


def mat_pow(m: Mat2, k: int) -> Mat2:
    if k < 0:
        m, k = mat_inv(m), -k
    out = IDENTITY
    while k:
        if k & 1:
            out = mat_mul(out, m)
        m = mat_mul(m, m)
        k >>= 1
    return out


def mat_mod(m: Mat2, n: int) -> Mat2:
    return tuple(tuple(x % n for x in row) for row in m)


def theta(m: FreeMap) -> Mat2:
    """Action on the abelianization, columns = exponent vectors of images."""
    if m.domain.size != 2 or m.codomain.size != 2:
        raise ValueError("theta is defined on rank-2 endomorphisms")
    cx = exponent_vector(m.images[0])
    cy = exponent_vector(m.images[1])
    out = ((cx[0], cy[0]), (cx[1], cy[1]))
    if det(out) not in (1, -1):
        raise ValueError(f"not an automorphism: determinant {det(out)}")
    return out


@dataclass(frozen=True)
class SanovWord:
    syllables: tuple  # ((letter 'A'|'B', exponent), ...), alternating

    def evaluate(self) -> Mat2:
        out = IDENTITY
        for g, e in self.syllables:
            out = mat_mul(out, mat_pow(MA if g == "A" else MB, e))
        return out

    def __str__(self):
        if not self.syllables:
            return "1"
        return " ".join(g if e == 1 else f"{g}^{e}" for g, e in self.syllables)


@dataclass(frozen=True)
class NotMember:
    stall: Mat2
    reason: str

    def __bool__(self):
        return False


def _round_quot(a: int, c: int) -> int:
    # k minimizing |a - 2 k c|
    k = a // (2 * c)
    best = min((k, k + 1), key=lambda j: abs(a - 2 * j * c))
    return best


def sanov_membership(m: Mat2) -> SanovWord | NotMember:
    """Word in A, B equal to m, or a certificate that m is outside <A, B>."""
    if det(m) != 1:
        return NotMember(m, "determinant is not 1")
    word: list = []

    def push(g, e):
        if e == 0:
            return
        if word and word[-1][0] == g:
            e += word[-1][1]
            word.pop()
            if e:
                word.append((g, e))
        else:
            word.append((g, e))

    cur = m
    while True:
        (a, b), (c, d) = cur
        if c == 0:
            if a == 1 and d == 1 and b % 2 == 0:
                push("A", b // 2)
                return SanovWord(tuple(word))
            return NotMember(cur, "upper triangular but not a power of A")
        if a == 0:
            return NotMember(cur, "first column cannot be reduced")
        if abs(a) > abs(c):
            k = _round_quot(a, c)
            nxt = mat_mul(mat_pow(MA, -k), cur)
            g = ("A", k)
        else:
            k = _round_quot(c, a)
            nxt = mat_mul(mat_pow(MB, -k), cur)
            g = ("B", k)
        if max(abs(nxt[0][0]), abs(nxt[1][0])) >= max(abs(a), abs(c)):
            return NotMember(cur, "reduction stalls")
        push(*g)
        cur = nxt


def congruence_check(m: Mat2, level: int) -> bool:
    return mat_mod(m, level) == mat_mod(IDENTITY, level)


# ---------------------------------------------------------------------------

_ST = Alphabet(("S", "T"))
MS: Mat2 = ((0, -1), (1, 0))
MT: Mat2 = ((1, 1), (0, 1))


@dataclass
class Sl2Result:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)


def _word_matrix(w: Word) -> Mat2:
    out = IDENTITY
    mats = (MS, MT)
    for g, e in w.syllables:
        out = mat_mul(out, mat_pow(mats[g], e))
    return out


def verify_level4_in_sanov(level: int = 4) -> Sl2Result:
    """Every Schreier generator of ker(SL2(Z) -> SL2(Z/level)) lies in <A, B>."""
    grp = FiniteGroup([mat_mod(MS, level), mat_mod(MT, level)],
                      lambda x, y: mat_mod(mat_mul(x, y), level), mat_mod(IDENTITY, level))
    t = coset_table_from_hom(grp, _ST)
    failures = []
    certs = []
    for j in range(t.rank):
        mtx = _word_matrix(t.schreier_word(j))
        r = sanov_membership(mtx)
        if not r or r.evaluate() != mtx:
            failures.append(mtx)
        else:
            certs.append(str(r))
    images = {mat_mod(m, level) for m in _sanov_mod(level)}
    det_ = {
        "order_mod_level": t.index,
        "generators": t.rank,
        "rejected": [list(map(list, f)) for f in failures],
        "image_of_sanov_mod_level": len(images),
        "index_of_sanov": t.index // len(images),
    }
    ok = not failures and t.index == 48 and det_["index_of_sanov"] == 12
    return Sl2Result("level-4 kernel inside <A, B>", ok, det_)


def _sanov_mod(level: int) -> set:
    start = mat_mod(IDENTITY, level)
    seen = {start}
    frontier = [start]
    gens = [mat_mod(MA, level), mat_mod(MB, level)]
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                h = mat_mod(mat_mul(m, g), level)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    return seen


def gamma_K0_test(m: FreeMap) -> bool:
    """theta(m) = I mod 4."""
    return congruence_check(theta(m), 4)


def gamma_K0_by_words(m: FreeMap) -> bool:
    """m(x) x^-1 and m(y) y^-1 have exponent sums divisible by 4."""
    gens = m.domain.gens()
    return all(not any(exponent_vector(m(g) * g.inverse(), 4)) for g in gens)


def verify_homology_action() -> Sl2Result:
    """Matrices of the two surface-bundle monodromies equal theta of the generators.

    On H1 with basis (xhat, yhat): a fixes xhat and sends yhat to yhat + 2 xhat;
    b sends xhat to xhat + 2 yhat and fixes yhat.  Columns are images.
    """
    from .freeprod import AUT_A, AUT_B
    a_mat = ((1, 2), (0, 1))
    b_mat = ((1, 0), (2, 1))
    ok_a = theta(AUT_A) == a_mat
    ok_b = theta(AUT_B) == b_mat
    return Sl2Result("homology action", ok_a and ok_b and det(a_mat) == 1 and det(b_mat) == 1,
                     {"a": a_mat, "b": b_mat, "theta_a": theta(AUT_A), "theta_b": theta(AUT_B)})


def reduced_words(alphabet: Alphabet, max_len: int) -> Iterator[Word]:
    """All reduced words up to the given length, shortlex order."""
    n = alphabet.size
    letters = [(g, 1) for g in range(n)] + [(g, -1) for g in range(n)]
    yield alphabet.identity()
    level = [()]
    for _ in range(max_len):
        nxt = []
        for w in level:
            for g, s in letters:
                if w and w[-1] == (g, -s):
                    continue
                nw = w + ((g, s),)
                nxt.append(nw)
                yield alphabet.make(nw)
        level = nxt


def verify_sanov_round_trip(max_len: int = 8) -> Sl2Result:
    """Every reduced word in A, B of length <= max_len is recovered exactly."""
    bad = 0
    count = 0
    seen: dict = {}
    collisions = 0
    for w in reduced_words(AB, max_len):
        count += 1
        m = IDENTITY
        for g, e in w.syllables:
            m = mat_mul(m, mat_pow(MA if g == 0 else MB, e))
        r = sanov_membership(m)
        want = tuple(("A" if g == 0 else "B", e) for g, e in w.syllables)
        if not r or r.syllables != want:
            bad += 1
        if m in seen:
            collisions += 1
        seen[m] = w
    return Sl2Result("alternating words round-trip", bad == 0 and collisions == 0,
                     {"words": count, "failures": bad, "collisions": collisions})


def verify_theta_nu0_injective(max_len: int = 8) -> Sl2Result:
    """theta(nu0(h)) pairwise distinct over reduced words h in a, b."""
    from .freeprod import AUT_A, AUT_B, AUT_A_INV, AUT_B_INV
    seen = {}
    clash = 0
    count = 0
    # theta is a homomorphism, so evaluate on matrices directly after
    # confirming the generator images.
    ta, tb = theta(AUT_A), theta(AUT_B)
    assert theta(AUT_A_INV) == mat_inv(ta) and theta(AUT_B_INV) == mat_inv(tb)
    for w in reduced_words(AB, max_len):
        count += 1
        m = IDENTITY
        for g, e in w.syllables:
            m = mat_mul(m, mat_pow(ta if g == 0 else tb, e))
        if m in seen:
            clash += 1
        seen[m] = w
    return Sl2Result("theta of nu0 injective on short words", clash == 0, {"words": count, "collisions": clash})


def _aut_generators():
    from .freeprod import AUT_A, AUT_A_INV, AUT_B, AUT_B_INV
    from .words import inner
    x, y = XY.gens()
    swap = FreeMap(XY, XY, (y, x))
    invx = FreeMap(XY, XY, (x.inverse(), y))
    niel = FreeMap(XY, XY, (x * y, y))
    niel_inv = FreeMap(XY, XY, (x * y.inverse(), y))
    return {
        "a": (AUT_A, AUT_A_INV),
        "b": (AUT_B, AUT_B_INV),
        "ix": (inner(x), inner(x.inverse())),
        "iy": (inner(y), inner(y.inverse())),
        "swap": (swap, swap),
        "invx": (invx, invx),
        "nielsen": (niel, niel_inv),
    }


def random_automorphism(rng, length: int) -> tuple[str, FreeMap]:
    """Random product of standard automorphisms (and inverses) of F(x, y)."""
    from .words import compose, identity_map
    gens = _aut_generators()
    names = sorted(gens)
    out = identity_map(XY)
    desc = []
    for _ in range(length):
        name = rng.choice(names)
        sign = rng.choice((1, -1))
        out = compose(out, gens[name][0 if sign > 0 else 1])
        desc.append(name if sign > 0 else f"{name}^-1")
    return " ".join(desc) or "1", out


def verify_level4_criterion(trials: int, seed: int, length: int = 8) -> Sl2Result:
    """Matrix test mod 4 agrees with the generator-word definition."""
    import random
    rng = random.Random(seed)
    bad = []
    hits = 0
    for _ in range(trials):
        desc, m = random_automorphism(rng, rng.randint(0, length))
        a, b = gamma_K0_test(m), gamma_K0_by_words(m)
        hits += a
        if a != b:
            bad.append(desc)
    return Sl2Result("level-4 matrix test vs word definition", not bad,
                     {"trials": trials, "in_level4": hits, "disagreements": bad[:10]})
