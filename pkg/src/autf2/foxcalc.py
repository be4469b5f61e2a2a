"""Free differential calculus over finite quotients.

Group rings F_p[G] (or Z[G]) are dense integer arrays indexed by the
states of a regular coset table of N = ker(F -> G).  For a word f the Fox
coefficients a_i(f) satisfy f - 1 = sum_i a_i(f) (x_i - 1); they are
accumulated left to right by tracking the image of the prefix.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from . import fp_linalg as la
from .quotients import MetabelianQuotient
from .schreier import CosetTable
from .words import Word, random_word

__all__ = [
    "GroupRing",
    "fox_coefficients",
    "sigma_p_matrix",
    "tau_p",
    "tau_p_matrix",
    "verify_exactness",
    "verify_fixed_dim",
    "verify_product_rule",
    "verify_power_row",
    "verify_fox_matches_rewriting",
]


class GroupRing:
    """Arithmetic in Z[G] / F_p[G] for G given by a regular coset table."""

    def __init__(self, table: CosetTable, modulus: int = 0):
        self.table = table
        self.modulus = modulus
        self.order = table.index

    def _m(self, a: np.ndarray) -> np.ndarray:
        return a % self.modulus if self.modulus else a

    def zero(self) -> np.ndarray:
        return np.zeros(self.order, dtype=np.int64)

    def basis(self, g: int) -> np.ndarray:
        v = self.zero()
        v[g] = 1
        return v

    def one(self) -> np.ndarray:
        return self.basis(0)

    @property
    def mult(self) -> np.ndarray:
        if not hasattr(self, "_mult"):
            t = self.table
            trans = t.transversals
            self._mult = np.array([[t.run(a, trans[b]) for b in range(t.index)] for a in range(t.index)], dtype=np.int64)
        return self._mult

    def left(self, g: int, v: np.ndarray) -> np.ndarray:
        """g * v."""
        out = self.zero()
        np.add.at(out, self.mult[g], v)
        return self._m(out)

    def right(self, v: np.ndarray, g: int) -> np.ndarray:
        """v * g."""
        out = self.zero()
        np.add.at(out, self.mult[:, g], v)
        return self._m(out)

    def augmentation(self, v: np.ndarray) -> int:
        s = int(v.sum())
        return s % self.modulus if self.modulus else s

    def image(self, w) -> int:
        return self.table.run(0, w)


@dataclass
class FoxImage:
    coeffs: list  # one group-ring vector per generator
    end: int      # state of the word's image

    def flat(self) -> np.ndarray:
        return np.concatenate(self.coeffs)


def fox_coefficients(w: Word, ring: GroupRing) -> FoxImage:
    t = ring.table
    n = t.alphabet.size
    coeffs = [ring.zero() for _ in range(n)]
    s = 0
    fwd, bwd = t.fwd, t.bwd
    for g, e in w.syllables:
        a = coeffs[g]
        if e > 0:
            col = fwd[g]
            for _ in range(e):
                a[s] += 1
                s = col[s]
        else:
            col = bwd[g]
            for _ in range(-e):
                s = col[s]
                a[s] -= 1
    return FoxImage([ring._m(a) for a in coeffs], s)


def tau_p(v: list, ring: GroupRing) -> np.ndarray:
    """sum_i a_i (x_i - 1)."""
    t = ring.table
    out = ring.zero()
    for i, a in enumerate(v):
        xi = t.fwd[i][0]
        out = out + ring.right(a, xi) - a
    return ring._m(out)


def tau_p_matrix(ring: GroupRing) -> np.ndarray:
    """Matrix of tau_p: rows indexed by (i, g), columns by G."""
    t = ring.table
    n, d = t.alphabet.size, ring.order
    out = np.zeros((n * d, d), dtype=np.int64)
    for i in range(n):
        xi = t.fwd[i][0]
        for g in range(d):
            out[i * d + g, ring.mult[g, xi]] += 1
            out[i * d + g, g] -= 1
    return ring._m(out)


def sigma_p_matrix(t: CosetTable, p: int) -> np.ndarray:
    """Fox coefficients of the Schreier generators, one row each, mod p."""
    ring = GroupRing(t, p)
    return np.array([fox_coefficients(t.schreier_word(j), ring).flat() for j in range(t.rank)], dtype=np.int64)


@dataclass
class FoxResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)


def verify_exactness(t: CosetTable, p: int) -> FoxResult:
    if t.index % p == 0:
        raise ValueError("p divides |G|")
    ring = GroupRing(t, p)
    n, d = t.alphabet.size, t.index
    sig = sigma_p_matrix(t, p)
    tau = tau_p_matrix(ring)
    rs, rt = la.rank(sig, p), la.rank(tau, p)
    comp = (sig @ tau) % p
    det = {"r": t.rank, "rank_sigma": rs, "rank_tau": rt, "n|G|": n * d, "composite_zero": not comp.any()}
    ok = rs == t.rank and rt == d - 1 and t.rank + d - 1 == n * d and not comp.any()
    return FoxResult(f"exactness |G|={d}, p={p}", ok, det)


def verify_fixed_dim(q: MetabelianQuotient) -> FoxResult:
    """Dimension of the G-fixed subspace of N/M equals the number of generators."""
    p, r = q.p, q.rank
    gens = [q.base.fwd[i][0] for i in range(q.base.alphabet.size)]
    stack = np.vstack([(q.rho[s] - np.eye(r, dtype=np.int64)) % p for s in gens])
    dim = r - la.rank(stack, p)
    n = q.base.alphabet.size
    return FoxResult(f"fixed dimension |G|={q.base.index}, p={p}", dim == n, {"fixed_dim": dim, "n": n})


def verify_product_rule(t: CosetTable, modulus: int, trials: int, seed: int, max_len: int = 24) -> FoxResult:
    ring = GroupRing(t, modulus)
    rng = random.Random(seed)
    A = t.alphabet
    bad = 0
    aug_bad = 0
    for _ in range(trials):
        w1 = random_word(A, rng.randint(0, max_len), rng)
        w2 = random_word(A, rng.randint(0, max_len), rng)
        f1, f2, f12 = (fox_coefficients(w, ring) for w in (w1, w2, w1 * w2))
        g1 = f1.end
        for i in range(A.size):
            if not np.array_equal(f12.coeffs[i], ring._m(f1.coeffs[i] + ring.left(g1, f2.coeffs[i]))):
                bad += 1
                break
        lhs = tau_p(f12.coeffs, ring)
        rhs = ring._m(ring.basis(f12.end) - ring.one())
        if not np.array_equal(lhs, rhs):
            aug_bad += 1
    return FoxResult("product rule", bad == 0 and aug_bad == 0,
                     {"trials": trials, "product_failures": bad, "identity_failures": aug_bad})


def verify_power_row(m: int, p: int) -> FoxResult:
    """In ker(x -> 1, y -> 0 in Z/m) the row of x^m is (sum_j x^j, 0)."""
    from .quotients import cyclic_group
    from .schreier import coset_table_from_hom
    from .words import XY
    t = coset_table_from_hom(cyclic_group(m, [1, 0]), XY, inverses=False)
    sig = sigma_p_matrix(t, p)
    xm = XY.gen(0) ** m
    j = [t.schreier_word(k) for k in range(t.rank)].index(xm)
    ring = GroupRing(t, p)
    want = ring.zero()
    s = 0
    for _ in range(m):
        want[s] += 1
        s = t.fwd[0][s]
    expect = np.concatenate([ring._m(want), ring.zero()])
    ok = np.array_equal(sig[j], expect)
    return FoxResult(f"power row m={m}, p={p}", ok, {"row": sig[j].tolist()})


def verify_fox_matches_rewriting(q: MetabelianQuotient, trials: int, seed: int, max_len: int = 16) -> FoxResult:
    """For h in N: fox(h) = (coordinates of h in N/M) @ sigma_p."""
    t, p = q.base, q.p
    ring = GroupRing(t, p)
    sig = sigma_p_matrix(t, p)
    rng = random.Random(seed)
    A = t.alphabet
    bad = 0
    for _ in range(trials):
        w = random_word(A, rng.randint(0, max_len), rng)
        h = w * t.transversal(t.run(0, w)).inverse()
        e = q.eval(h)
        lhs = fox_coefficients(h, ring).flat()
        rhs = (np.array(e.vec, dtype=np.int64) @ sig) % p
        if e.state != 0 or not np.array_equal(lhs, rhs):
            bad += 1
    return FoxResult("fox agrees with rewriting", bad == 0, {"trials": trials, "failures": bad})
