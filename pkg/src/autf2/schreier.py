"""Finite-index subgroups: coset tables, Schreier generators, rewriting, oracles.

Cosets are right cosets ``Ht``; state 0 is ``H`` itself, and the action of
a letter sends ``Ht`` to ``Htg``.  Transversals are built breadth first
(generators in alphabet order, all positive letters before negative ones),
so they are prefix closed.

Tables work over a free :class:`~autf2.words.Alphabet` or over a free
product of cyclic groups (``alphabet.is_free`` false, ``alphabet.orders``
set), in which case only positive letters are used.
"""
from __future__ import annotations

import hashlib
import json
import os
from array import array
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Any, Callable, Hashable, Iterable, Sequence

from .words import Alphabet, Word, exponent_vector

__all__ = [
    "FiniteGroup",
    "PermGroup",
    "CosetTable",
    "SubgroupOracle",
    "BoundExceeded",
    "coset_table_from_hom",
    "coset_table_from_action",
    "coset_table_from_oracle",
    "schreier_generators",
    "reidemeister_rewrite",
    "table_oracle",
    "verbal_oracle",
    "oracle_intersect",
    "oracle_conjugate",
    "oracle_core4",
    "oracle_preimage",
    "normal_core",
    "full_oracle",
    "TableCache",
    "content_hash",
]


class BoundExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# finite groups


class FiniteGroup:
    """Finite group given by generator elements and a multiplication.

    Elements must be hashable.  ``inv`` is optional; inverses of generators
    are otherwise found as positive powers.
    """

    def __init__(self, gens: Sequence[Hashable], mul: Callable, identity: Hashable,
                 inv: Callable | None = None, order: int | None = None, name: str = ""):
        self.gens = list(gens)
        self.mul = mul
        self.identity = identity
        self._inv = inv
        self.order = order
        self.name = name

    def inv(self, e):
        if self._inv is not None:
            return self._inv(e)
        prev, cur = self.identity, e
        while cur != self.identity:
            prev, cur = cur, self.mul(cur, e)
        return prev

    def power(self, e, k: int):
        if k < 0:
            e, k = self.inv(e), -k
        out = self.identity
        while k:
            if k & 1:
                out = self.mul(out, e)
            e = self.mul(e, e)
            k >>= 1
        return out

    def element_order(self, e) -> int:
        k, cur = 1, e
        while cur != self.identity:
            cur = self.mul(cur, e)
            k += 1
        return k

    def evaluate(self, w) -> Hashable:
        """Image of a word (free or free-product) under generator -> gens."""
        out = self.identity
        for g, e in w.syllables:
            out = self.mul(out, self.power(self.gens[g], e))
        return out

    def elements(self, limit: int | None = None) -> list:
        seen = {self.identity: 0}
        out = [self.identity]
        i = 0
        while i < len(out):
            e = out[i]
            for g in self.gens:
                f = self.mul(e, g)
                if f not in seen:
                    seen[f] = len(out)
                    out.append(f)
                    if limit is not None and len(out) > limit:
                        raise BoundExceeded(f"group larger than {limit}")
            i += 1
        return out

    def right_multipliers(self, inverses: bool) -> list:
        ms = [(g, self.gens[g]) for g in range(len(self.gens))]
        if inverses:
            ms += [(-g - 1, self.inv(self.gens[g])) for g in range(len(self.gens))]
        return ms


def _pad(p: bytes) -> bytes:
    return p + bytes(range(len(p), 256))


class PermGroup(FiniteGroup):
    """Permutation group; elements are ``bytes`` (degree <= 256).

    Composition is left to right: ``mul(a, b)`` maps ``i`` to ``b[a[i]]``,
    matching the right action of words on coset tables.
    """

    def __init__(self, perms: Sequence[Sequence[int]], order: int | None = None, name: str = ""):
        perms = [bytes(p) for p in perms]
        if not perms:
            raise ValueError("need at least one generator")
        d = len(perms[0])
        if d > 256 or any(len(p) != d or sorted(p) != list(range(d)) for p in perms):
            raise ValueError("generators must be permutations of a common degree <= 256")
        self.degree = d
        super().__init__(perms, self._mul, bytes(range(d)), self._inverse, order, name)

    @staticmethod
    def _mul(a: bytes, b: bytes) -> bytes:
        return a.translate(_pad(b))

    @staticmethod
    def _inverse(a: bytes) -> bytes:
        out = bytearray(len(a))
        for i, j in enumerate(a):
            out[j] = i
        return bytes(out)

    def right_multipliers(self, inverses: bool) -> list:
        return [(k, _pad(p)) for k, p in super().right_multipliers(inverses)]


def cyclic_perm(n: int, shift: int = 1) -> list[int]:
    return [(i + shift) % n for i in range(n)]


def direct_sum_perms(*blocks: Sequence[int]) -> list[int]:
    out, off = [], 0
    for b in blocks:
        out += [off + j for j in b]
        off += len(b)
    return out


# ---------------------------------------------------------------------------
# coset tables


def _schreier_alphabet(r: int) -> Alphabet:
    return Alphabet(tuple(f"y{i + 1}" for i in range(max(r, 1))))


class CosetTable:
    """Transitive action of a finitely generated group on right cosets.

    ``fwd[g][s]`` is the state of ``t_s g``, ``bwd[g][s]`` that of
    ``t_s g^-1``.  ``parent``/``parent_letter`` encode the breadth-first
    spanning tree; letters are coded ``g + 1`` (positive) and
    ``-(g + 1)`` (negative).
    """

    def __init__(self, alphabet, fwd, bwd, parent, parent_letter, elements=None, label=""):
        self.alphabet = alphabet
        self.fwd = fwd
        self.bwd = bwd
        self.parent = parent
        self.parent_letter = parent_letter
        self.elements = elements
        self.label = label
        self.index = len(parent)
        self._build_crossings()

    # -- structure -------------------------------------------------------

    def _involution(self, g: int) -> bool:
        return not self.alphabet.is_free and self.alphabet.orders[g] == 2

    def _build_crossings(self) -> None:
        n = self.alphabet.size
        parent, pl = self.parent, self.parent_letter
        cross = []
        edges = []
        for g in range(n):
            cross.append(array("l", [-1]) * self.index)
        inv_code = {g: (g + 1 if self._involution(g) else -(g + 1)) for g in range(n)}
        for s in range(self.index):
            for g in range(n):
                t = self.fwd[g][s]
                if (parent[t] == s and pl[t] == g + 1) or (parent[s] == t and pl[s] == inv_code[g]):
                    continue
                cross[g][s] = len(edges)
                edges.append((s, g))
        self.crossing = cross
        self.edges = edges

    @property
    def rank(self) -> int:
        """Number of nontrivial Schreier generators."""
        return len(self.edges)

    @cached_property
    def schreier_alphabet(self) -> Alphabet:
        return _schreier_alphabet(self.rank)

    def transversal(self, s: int):
        letters = []
        while s:
            letters.append(self.parent_letter[s])
            s = self.parent[s]
        letters.reverse()
        return self.alphabet.make((abs(c) - 1, 1 if c > 0 else -1) for c in letters)

    @cached_property
    def transversals(self) -> list:
        return [self.transversal(s) for s in range(self.index)]

    def schreier_word(self, j: int):
        s, g = self.edges[j]
        A = self.alphabet
        return self.transversal(s) * A.gen(g) * self.transversal(self.fwd[g][s]).inverse()

    # -- action ----------------------------------------------------------

    def step(self, s: int, g: int, e: int) -> int:
        col = self.fwd[g] if e > 0 else self.bwd[g]
        for _ in range(abs(e)):
            s = col[s]
        return s

    def run(self, s: int, w) -> int:
        fwd, bwd = self.fwd, self.bwd
        for g, e in w.syllables:
            col = fwd[g] if e > 0 else bwd[g]
            for _ in range(abs(e)):
                s = col[s]
        return s

    def contains(self, w) -> bool:
        return self.run(0, w) == 0

    def scan(self, s: int, w, modulus: int = 0) -> tuple[int, dict]:
        """Walk ``w`` from state s collecting Schreier-generator exponents.

        Returns (end state, sparse exponent vector) describing
        ``t_s w t_end^-1`` as a product of Schreier generators.
        """
        fwd, bwd, cross = self.fwd, self.bwd, self.crossing
        vec: dict = {}
        for g, e in w.syllables:
            if e > 0:
                col, cr = fwd[g], cross[g]
                for _ in range(e):
                    j = cr[s]
                    if j >= 0:
                        vec[j] = vec.get(j, 0) + 1
                    s = col[s]
            else:
                col, cr = bwd[g], cross[g]
                for _ in range(-e):
                    s = col[s]
                    j = cr[s]
                    if j >= 0:
                        vec[j] = vec.get(j, 0) - 1
        if modulus:
            vec = {j: c % modulus for j, c in vec.items() if c % modulus}
        else:
            vec = {j: c for j, c in vec.items() if c}
        return s, vec

    def rewrite(self, w, start: int = 0) -> tuple[int, Word]:
        """Reidemeister rewriting of ``t_start w t_end^-1``."""
        fwd, bwd, cross = self.fwd, self.bwd, self.crossing
        raw = []
        s = start
        for g, e in w.syllables:
            if e > 0:
                col, cr = fwd[g], cross[g]
                for _ in range(e):
                    j = cr[s]
                    if j >= 0:
                        raw.append((j, 1))
                    s = col[s]
            else:
                col, cr = bwd[g], cross[g]
                for _ in range(-e):
                    s = col[s]
                    j = cr[s]
                    if j >= 0:
                        raw.append((j, -1))
        return s, self.schreier_alphabet.make(raw)

    def state_mul(self, a: int, b: int) -> int:
        """Product of states for a table of a normal subgroup (regular action)."""
        return self.run(a, self.transversals[b] if self.index <= 4096 else self.transversal(b))

    def perms(self) -> list[list[int]]:
        return [list(col) for col in self.fwd]

    # -- checks ----------------------------------------------------------

    def check(self) -> None:
        """Verify invertibility, the Schreier property and state labels."""
        n = self.alphabet.size
        for g in range(n):
            for s in range(self.index):
                if self.bwd[g][self.fwd[g][s]] != s:
                    raise AssertionError(f"column {g} not invertible at state {s}")
        for s in range(1, self.index):
            p = self.parent[s]
            if not (0 <= p < self.index):
                raise AssertionError("bad parent")
            c = self.parent_letter[s]
            g = abs(c) - 1
            if (self.fwd[g] if c > 0 else self.bwd[g])[p] != s:
                raise AssertionError(f"parent edge of {s} inconsistent")
        if self.index <= 4096:
            words = self.transversals
            if not words[0].is_identity():
                raise AssertionError("transversal[0] must be the identity")
            for s, t in enumerate(words):
                if self.run(0, t) != s:
                    raise AssertionError(f"transversal word of {s} lands elsewhere")

    # -- serialization ---------------------------------------------------

    def to_json(self, with_words: bool = True) -> dict:
        A = self.alphabet
        d = {
            "alphabet": list(A.names),
            "orders": None if A.is_free else list(A.orders),
            "index": self.index,
            "action": [list(col) for col in self.fwd],
            "parent": list(self.parent),
            "parent_letter": list(self.parent_letter),
            "label": self.label,
        }
        if with_words:
            d["transversal"] = self._transversal_strings()
        return d

    def _transversal_strings(self) -> list[str]:
        # Built incrementally along the tree; BFS order has parents first.
        names = self.alphabet.names
        syl: list = [()] * self.index
        out = ["1"] * self.index
        for s in range(1, self.index):
            c = self.parent_letter[s]
            g, e = abs(c) - 1, (1 if c > 0 else -1)
            prev = syl[self.parent[s]]
            if prev and prev[-1][0] == g:
                cur = prev[:-1] + ((g, prev[-1][1] + e),)
            else:
                cur = prev + ((g, e),)
            syl[s] = cur
            out[s] = " ".join(names[h] if f == 1 else f"{names[h]}^{f}" for h, f in cur)
        return out

    @classmethod
    def from_json(cls, d: dict) -> "CosetTable":
        if d.get("orders") is None:
            A = Alphabet(tuple(d["alphabet"]))
        else:
            from .freeprod import FPAlphabet
            A = FPAlphabet(tuple(d["alphabet"]), tuple(d["orders"]))
        fwd = [array("l", col) for col in d["action"]]
        bwd = [_invert_column(col) for col in fwd]
        return cls(A, fwd, bwd, array("l", d["parent"]), array("l", d["parent_letter"]), label=d.get("label", ""))

    def content_hash(self) -> str:
        return content_hash({"alphabet": list(self.alphabet.names), "action": [list(c) for c in self.fwd],
                             "parent": list(self.parent), "parent_letter": list(self.parent_letter)})

    def __repr__(self):
        return f"CosetTable({self.label or 'subgroup'}, index={self.index}, rank={self.rank})"


def _invert_column(col) -> array:
    out = array("l", [0]) * len(col)
    for i, j in enumerate(col):
        out[j] = i
    return out


def _default_alphabet(n: int) -> Alphabet:
    return Alphabet(tuple(f"x{i + 1}" for i in range(n)))


def coset_table_from_hom(group: FiniteGroup, alphabet=None, inverses: bool = True,
                         keep_elements: bool | None = None, label: str = "",
                         max_index: int | None = None) -> CosetTable:
    """Coset table of the kernel of ``generator i -> group.gens[i]``.

    The states are the elements of the image (regular action), enumerated
    breadth first from the identity.
    """
    if alphabet is None:
        alphabet = _default_alphabet(len(group.gens))
    n = alphabet.size
    if len(group.gens) != n:
        raise ValueError("need one generator image per letter")
    if not alphabet.is_free:
        inverses = False
        for g in range(n):
            if group.power(group.gens[g], alphabet.orders[g]) != group.identity:
                raise ValueError(f"image of letter {alphabet.names[g]} has order not dividing {alphabet.orders[g]}")
    mults = group.right_multipliers(inverses)
    mul = group.mul
    if isinstance(group, PermGroup):
        mul = bytes.translate
    ident = group.identity
    elements = [ident]
    index = {ident: 0}
    parent = array("l", [-1])
    pletter = array("l", [0])
    fwd = [array("l") for _ in range(n)]
    i = 0
    while i < len(elements):
        e = elements[i]
        for code, m in mults:
            f = mul(e, m)
            j = index.get(f)
            if j is None:
                j = len(elements)
                index[f] = j
                elements.append(f)
                parent.append(i)
                pletter.append(code + 1 if code >= 0 else code)
                if max_index is not None and j >= max_index:
                    raise BoundExceeded(f"image larger than {max_index}")
            if code >= 0:
                fwd[code].append(j)
        i += 1
    if group.order is not None and len(elements) != group.order:
        raise ValueError(f"generator images reach {len(elements)} of {group.order} elements: not generating")
    bwd = [_invert_column(col) for col in fwd]
    if keep_elements is None:
        keep_elements = len(elements) <= 100_000
    del index
    return CosetTable(alphabet, fwd, bwd, parent, pletter, elements if keep_elements else None, label=label)


def coset_table_from_action(perms: Sequence[Sequence[int]], alphabet=None, label: str = "") -> CosetTable:
    """Table of the stabilizer of point 0 under a transitive permutation action."""
    if alphabet is None:
        alphabet = _default_alphabet(len(perms))
    n = alphabet.size
    d = len(perms[0])
    invs = [_invert_column(array("l", p)) for p in perms]
    letters = [(g, perms[g]) for g in range(n)]
    if alphabet.is_free:
        letters += [(-g - 1, invs[g]) for g in range(n)]
    label_of = {0: 0}
    order = [0]
    parent = array("l", [-1])
    pletter = array("l", [0])
    i = 0
    while i < len(order):
        pt = order[i]
        for code, p in letters:
            q = p[pt]
            if q not in label_of:
                label_of[q] = len(order)
                order.append(q)
                parent.append(i)
                pletter.append(code + 1 if code >= 0 else code)
        i += 1
    if len(order) != d:
        raise ValueError(f"action not transitive: orbit of 0 has {len(order)} of {d} points")
    fwd = [array("l", (label_of[perms[g][pt]] for pt in order)) for g in range(n)]
    bwd = [_invert_column(col) for col in fwd]
    return CosetTable(alphabet, fwd, bwd, parent, pletter, label=label)


def coset_table_from_oracle(oracle: "SubgroupOracle", bound: int, label: str = "") -> CosetTable:
    """Enumerate right cosets of a finite-index subgroup given by membership.

    ``Ht == Ht'`` is decided as ``t t'^-1 in H``; the table is checked for
    consistency on every edge, so a predicate that is not a subgroup is
    detected.
    """
    A = oracle.alphabet
    if not A.is_free:
        raise ValueError("oracle enumeration supports free alphabets only")
    n = A.size
    reps = [A.identity()]
    rep_inv = [A.identity()]
    parent = array("l", [-1])
    pletter = array("l", [0])
    fwd: list[dict] = [dict() for _ in range(n)]
    bwd: list[dict] = [dict() for _ in range(n)]
    letters = [(g, 1) for g in range(n)] + [(g, -1) for g in range(n)]
    gens = A.gens()
    i = 0
    while i < len(reps):
        for g, e in letters:
            known = fwd[g] if e > 0 else bwd[g]
            if i in known:
                continue
            cand = reps[i] * (gens[g] if e > 0 else gens[g].inverse())
            target = None
            for j in range(len(reps)):
                if oracle.contains(cand * rep_inv[j]):
                    target = j
                    break
            if target is None:
                target = len(reps)
                if target >= bound:
                    raise BoundExceeded(f"more than {bound} cosets")
                reps.append(cand)
                rep_inv.append(cand.inverse())
                parent.append(i)
                pletter.append((g + 1) * e)
            back = bwd[g] if e > 0 else fwd[g]
            if back.get(target, i) != i:
                raise ValueError("oracle inconsistent with a subgroup (edge clash)")
            known[i] = target
            back[target] = i
        i += 1
    idx = len(reps)
    for g in range(n):
        if len(fwd[g]) != idx or len(bwd[g]) != idx:
            raise ValueError("oracle inconsistent with a subgroup (incomplete column)")
    fwd_cols = [array("l", (fwd[g][s] for s in range(idx))) for g in range(n)]
    bwd_cols = [array("l", (bwd[g][s] for s in range(idx))) for g in range(n)]
    t = CosetTable(A, fwd_cols, bwd_cols, parent, pletter, label=label)
    return t


def schreier_generators(t: CosetTable) -> list:
    """Nontrivial Schreier generators ``t_s g (t_{sg})^-1`` in edge order."""
    return [t.schreier_word(j) for j in range(t.rank)]


def reidemeister_rewrite(t: CosetTable, w) -> Word:
    """Express a subgroup element as a word in the Schreier generators."""
    end, out = t.rewrite(w)
    if end != 0:
        raise ValueError(f"{w} is not in the subgroup (ends at coset {end})")
    return out


def normal_core(t: CosetTable, label: str = "") -> CosetTable:
    """Kernel of the action on the cosets of ``t`` (the normal core)."""
    return coset_table_from_hom(PermGroup([list(c) for c in t.fwd]), t.alphabet, label=label or f"core({t.label})")


# ---------------------------------------------------------------------------
# oracles


@dataclass
class SubgroupOracle:
    contains: Callable[[Any], bool]
    alphabet: Any
    label: str = ""
    table: CosetTable | None = None
    index: int | None = None

    def __call__(self, w) -> bool:
        return self.contains(w)


def table_oracle(t: CosetTable, label: str = "") -> SubgroupOracle:
    return SubgroupOracle(t.contains, t.alphabet, label or t.label, t, t.index)


def full_oracle(alphabet) -> SubgroupOracle:
    return SubgroupOracle(lambda w: True, alphabet, "whole group", index=1)


def verbal_oracle(k: int, alphabet: Alphabet = None) -> SubgroupOracle:
    """F^k[F,F]: exponent sums all divisible by k."""
    from .words import XY
    A = alphabet or XY
    if k < 1:
        raise ValueError("k must be positive")

    def contains(w):
        return not any(exponent_vector(w, k))

    return SubgroupOracle(contains, A, f"F^{k}[F,F]", index=k ** A.size)


def oracle_intersect(o1: SubgroupOracle, o2: SubgroupOracle, label: str = "") -> SubgroupOracle:
    if o1.alphabet != o2.alphabet:
        raise ValueError("alphabet mismatch")
    c1, c2 = o1.contains, o2.contains
    return SubgroupOracle(lambda w: c1(w) and c2(w), o1.alphabet, label or f"({o1.label}) & ({o2.label})")


def oracle_conjugate(o: SubgroupOracle, g) -> SubgroupOracle:
    """g H g^-1."""
    gi = g.inverse()
    c = o.contains
    return SubgroupOracle(lambda w: c(gi * w * g), o.alphabet, f"{g} ({o.label}) {gi}")


def oracle_core4(o: SubgroupOracle, reps: Sequence | None = None, label: str = "") -> SubgroupOracle:
    """Intersection of the conjugates g H g^-1 over a transversal of F^2[F,F].

    Equals the normal core whenever the normalizer of H contains F^2[F,F].
    """
    A = o.alphabet
    if reps is None:
        gens = A.gens()
        reps = []
        for bits in product((0, 1), repeat=A.size):
            r = A.identity()
            for g, b in zip(gens, bits):
                if b:
                    r = r * g
            reps.append(r)
    pairs = [(r.inverse(), r) for r in reps]
    c = o.contains

    def contains(w):
        return all(c(ri * w * r) for ri, r in pairs)

    return SubgroupOracle(contains, A, label or f"core({o.label})")


def oracle_preimage(h: Callable, target: SubgroupOracle, alphabet=None, label: str = "") -> SubgroupOracle:
    c = target.contains
    return SubgroupOracle(lambda w: c(h(w)), alphabet or target.alphabet, label or f"preimage({target.label})")


# ---------------------------------------------------------------------------
# caching


def content_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


class TableCache:
    """Content-addressed on-disk store of coset tables (JSON files)."""

    def __init__(self, root: str | os.PathLike):
        self.root = os.fspath(root)
        os.makedirs(self.root, exist_ok=True)

    def path(self, key: str) -> str:
        return os.path.join(self.root, f"table-{key}.json")

    def get(self, key: str) -> CosetTable | None:
        p = self.path(key)
        if not os.path.exists(p):
            return None
        with open(p) as fh:
            d = json.load(fh)
        t = CosetTable.from_json(d["table"])
        if d.get("table_hash") != t.content_hash():
            raise ValueError(f"cached table {p} fails its content hash")
        return t

    def put(self, key: str, t: CosetTable) -> str:
        p = self.path(key)
        tmp = p + ".tmp"
        with open(tmp, "w") as fh:
            json.dump({"key": key, "table_hash": t.content_hash(), "table": t.to_json()}, fh, separators=(",", ":"))
        os.replace(tmp, p)
        return p
