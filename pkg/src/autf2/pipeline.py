"""The explicit finite-index subgroup K of F = F(x, y) from a quotient of Phi.

Inputs: a surjection Phi = F(a, b) -> Q (permutation images of a, b) and
primes p, q.  The chain of subgroups built here:

    Nq     = ker(Phi -> Q)                     index n
    Mq     = Nq^p [Nq, Nq]   (or Nq itself)    index m in Phi
    M      = {w in F^2[F,F] : transport(w) in Mq}
    S      = normal core of M in F             [F:S] | 4 m^4
    T      = S cap F^6[F,F]                    [F:T] | 36 m^4
    U      = T^q [T, T]                        membership only
    K      = U cap F^4[F,F]

``transport`` sends w in F cap F' to Phi: embed in the free product,
rewrite in the basis u, v, w, kill v, then read ubar = b and
wbar = b^-1 a.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import fp_linalg as la
from .freeprod import AUT_A, AUT_A_INV, AUT_B, AUT_B_INV, embed_F, kill_v, rewrite_in_uvw
from .quotients import MetabelianQuotient, verify_no_abelian_normal
from .schreier import (
    CosetTable,
    FiniteGroup,
    PermGroup,
    SubgroupOracle,
    TableCache,
    content_hash,
    coset_table_from_hom,
    coset_table_from_oracle,
    cyclic_perm,
    direct_sum_perms,
    oracle_core4,
    table_oracle,
)
from .sl2 import congruence_check, random_automorphism, sanov_membership, theta
from .words import AB, UW, XY, FreeMap, Word, commutator, evaluate_phi_word, exponent_vector, inner, random_word

__all__ = [
    "ParamError",
    "NSpec",
    "PipelineParams",
    "PipelineConfig",
    "CONFIG_A",
    "CONFIG_B",
    "check_params",
    "has_nontrivial_cyclic_normal",
    "build_m_level",
    "transport",
    "KOracle",
    "build_k_oracle",
    "audit_invariance",
    "audit_theorem",
    "reduce_general_N",
    "nu0",
]


class ParamError(ValueError):
    pass


@dataclass(frozen=True)
class NSpec:
    """Finite quotient of Phi given by permutation images of a and b."""

    a: tuple[int, ...]
    b: tuple[int, ...]
    route: str = "metabelian"  # "metabelian": Mq = Nq^p[Nq,Nq]; "direct": Mq = Nq
    name: str = ""

    def group(self) -> PermGroup:
        return PermGroup([self.a, self.b], name=self.name)

    def to_json(self) -> dict:
        return {"a": list(self.a), "b": list(self.b), "route": self.route, "name": self.name}


@dataclass(frozen=True)
class PipelineParams:
    q: int
    p: int | None = None


@dataclass(frozen=True)
class PipelineConfig:
    nspec: NSpec
    params: PipelineParams
    seed: int = 0
    invariance_trials: int = 1000
    theorem_samples: int = 100
    max_len: int = 48
    max_states: int = 2_000_000

    def to_json(self) -> dict:
        return {"nspec": self.nspec.to_json(), "params": asdict(self.params), "seed": self.seed,
                "invariance_trials": self.invariance_trials, "theorem_samples": self.theorem_samples,
                "max_len": self.max_len}

    @classmethod
    def from_json(cls, d: dict) -> "PipelineConfig":
        ns = d["nspec"]
        pr = d["params"]
        return cls(NSpec(tuple(ns["a"]), tuple(ns["b"]), ns.get("route", "metabelian"), ns.get("name", "")),
                   PipelineParams(int(pr["q"]), None if pr.get("p") is None else int(pr["p"])),
                   int(d.get("seed", 0)), int(d.get("invariance_trials", 1000)),
                   int(d.get("theorem_samples", 100)), int(d.get("max_len", 48)))

    def digest(self) -> str:
        return content_hash(self.to_json())


CONFIG_A = PipelineConfig(NSpec((0,), (0,), "metabelian", "trivial"), PipelineParams(q=5, p=3))
CONFIG_B = PipelineConfig(NSpec((1, 2, 0, 3), (1, 0, 3, 2), "direct", "A4"), PipelineParams(q=5))


def _odd_prime(k) -> bool:
    return k is not None and k % 2 == 1 and la.is_prime(k)


@dataclass(frozen=True)
class Validated:
    n: int
    m: int
    route: str


def has_nontrivial_cyclic_normal(Q: FiniteGroup, limit: int = 10 ** 4) -> bool:
    """Does some g != e have a cyclic normal closure?"""
    elts = Q.elements(limit=limit)
    ident = Q.identity
    for g in elts:
        if g == ident:
            continue
        closure = _normal_closure(Q, g, elts)
        if any(Q.element_order(h) == len(closure) for h in closure):
            return True
    return False


def _normal_closure(Q: FiniteGroup, g, elts) -> set:
    conj = {Q.mul(Q.mul(Q.inv(h), g), h) for h in elts}
    sub = {Q.identity}
    frontier = [Q.identity]
    while frontier:
        nxt = []
        for e in frontier:
            for c in conj:
                f = Q.mul(e, c)
                if f not in sub:
                    sub.add(f)
                    nxt.append(f)
        frontier = nxt
    return sub


def check_params(cfg: PipelineConfig) -> Validated:
    ns, pr = cfg.nspec, cfg.params
    problems = []
    if ns.route not in ("metabelian", "direct"):
        raise ParamError(f"unknown route {ns.route!r}")
    try:
        Q = ns.group()
        n = len(Q.elements(limit=10 ** 5))
    except Exception as exc:  # malformed permutations
        raise ParamError(f"bad quotient description: {exc}") from None
    q, p = pr.q, pr.p
    if not _odd_prime(q):
        problems.append(f"q = {q} is not an odd prime")
    elif n % q == 0:
        problems.append(f"q = {q} divides n = {n}")
    if ns.route == "metabelian":
        if not _odd_prime(p):
            problems.append(f"p = {p} is not an odd prime")
        elif n % p == 0:
            problems.append(f"p = {p} divides n = {n}")
        if p == q:
            problems.append("p and q must be distinct")
        m = n * p ** (n + 1) if _odd_prime(p) else 0
    else:
        if p is not None and (p == q or not _odd_prime(p)):
            problems.append(f"p = {p} is not an odd prime distinct from q")
        m = n
        if has_nontrivial_cyclic_normal(Q):
            problems.append("quotient has a nontrivial cyclic normal subgroup; direct route not applicable")
    if m and _odd_prime(q) and m % q == 0:
        problems.append(f"q = {q} divides m = {m}")
    if problems:
        raise ParamError("; ".join(problems))
    return Validated(n, m, ns.route)


@dataclass
class MLevel:
    n_table: CosetTable
    m_table: CosetTable
    quotient: MetabelianQuotient | None
    m: int


def build_m_level(ns: NSpec, p: int | None) -> MLevel:
    """Coset table of Mq in Phi (regular, states = elements of Phi/Mq)."""
    n_table = coset_table_from_hom(ns.group(), AB, label="Nq")
    if ns.route == "direct":
        return MLevel(n_table, n_table, None, n_table.index)
    q = MetabelianQuotient(n_table, p)
    m_table = coset_table_from_hom(q.as_group(), AB, label="Mq")
    return MLevel(n_table, m_table, q, m_table.index)


def check_cyclic_normal_property(level: MLevel) -> bool:
    """Cyclic (indeed abelian) normal subgroups of Phi/Mq map trivially to Phi/Nq."""
    if level.quotient is None:
        return not has_nontrivial_cyclic_normal(PermGroup([list(c) for c in level.m_table.fwd]))
    if level.quotient.base.index == 1:
        return True  # Nq = Phi: the image is trivial by definition
    return verify_no_abelian_normal(level.quotient).passed


def transport(w: Word) -> Word | None:
    """Image in Phi of w in F^2[F,F], or None when w is outside."""
    if any(exponent_vector(w, 2)):
        return None
    ubar = kill_v(rewrite_in_uvw(embed_F(w)))
    a, b = AB.gens()
    return evaluate_phi_word_words(ubar, (b, b.inverse() * a))


def evaluate_phi_word_words(w: Word, images) -> Word:
    from .words import evaluate_word
    return evaluate_word(w, images)


def nu0(h: Word) -> FreeMap:
    """a -> AUT_A, b -> AUT_B."""
    return evaluate_phi_word(h, (AUT_A, AUT_B), (AUT_A_INV, AUT_B_INV))


# ---------------------------------------------------------------------------


def _perm_with_blocks(cols: Sequence[Sequence[int]]) -> list[list[int]]:
    # F/T as permutations: the M action plus two 6-cycles tracking exponent sums mod 6.
    ident6 = list(range(6))
    six = cyclic_perm(6)
    return [direct_sum_perms(cols[0], six, ident6), direct_sum_perms(cols[1], ident6, six)]


def _image_mod4(t: CosetTable) -> int:
    """Order of the image of the subgroup in (Z/4)^2 via exponent sums."""
    idx = t.index
    ab = np.zeros((idx, 2), dtype=np.int64)
    for s in range(1, idx):
        c = t.parent_letter[s]
        g = abs(c) - 1
        ab[s] = ab[t.parent[s]]
        ab[s, g] += 1 if c > 0 else -1
    gens = set()
    for j, (s, g) in enumerate(t.edges):
        v = ab[s].copy()
        v[g] += 1
        v -= ab[t.fwd[g][s]]
        gens.add((int(v[0]) % 4, int(v[1]) % 4))
    span = {(0, 0)}
    frontier = [(0, 0)]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                c = ((a[0] + g[0]) % 4, (a[1] + g[1]) % 4)
                if c not in span:
                    span.add(c)
                    nxt.append(c)
        frontier = nxt
    return len(span)


@dataclass
class KOracle:
    config: PipelineConfig
    n: int
    m: int
    level: MLevel
    M_table: CosetTable
    S_table: CosetTable
    T_table: CosetTable
    image_mod4: int
    checks: dict = field(default_factory=dict)

    # -- membership -------------------------------------------------------

    def transport_state(self, w: Word) -> int | None:
        h = transport(w)
        return None if h is None else self.level.m_table.run(0, h)

    def in_pullback(self, w: Word) -> bool:
        return self.transport_state(w) == 0

    def in_core(self, w: Word) -> bool:
        return self.S_table.contains(w)

    def in_core6(self, w: Word) -> bool:
        return self.T_table.contains(w)

    def in_core6_q(self, w: Word) -> bool:
        s, vec = self.T_table.scan(0, w, self.config.params.q)
        return s == 0 and not vec

    @staticmethod
    def in_level4(w: Word) -> bool:
        return not any(exponent_vector(w, 4))

    def contains(self, w: Word) -> bool:
        return self.in_level4(w) and self.in_core6_q(w)

    def in_transport_l(self, w: Word) -> bool:
        """Membership in the pullback of Mq^q [Mq, Mq]."""
        h = transport(w)
        if h is None:
            return False
        s, vec = self.level.m_table.scan(0, h, self.config.params.q)
        return s == 0 and not vec

    def oracles(self) -> dict[str, SubgroupOracle]:
        return {
            "pullback": SubgroupOracle(self.in_pullback, XY, "M", self.M_table, self.M_table.index),
            "core": SubgroupOracle(self.in_core, XY, "S", self.S_table, self.S_table.index),
            "core6": SubgroupOracle(self.in_core6, XY, "T", self.T_table, self.T_table.index),
            "core6_q": SubgroupOracle(self.in_core6_q, XY, "U"),
            "level4": SubgroupOracle(self.in_level4, XY, "K0", index=16),
            "target": SubgroupOracle(self.contains, XY, "K"),
        }

    # -- indices ----------------------------------------------------------

    @property
    def index_S(self) -> int:
        return self.S_table.index

    @property
    def index_T(self) -> int:
        return self.T_table.index

    def index_U_formula(self) -> str:
        t = self.index_T
        return f"{t} * {self.config.params.q}^{t + 1}"

    def index_K_formula(self) -> str:
        t = self.index_T
        return f"{t * self.image_mod4} * {self.config.params.q}^{t + 1}"

    def index_K_bound_formula(self) -> str:
        m = self.m
        return f"{144 * m ** 4} * {self.config.params.q}^{36 * m ** 4 + 1}"

    def index_summary(self) -> dict:
        m, q = self.m, self.config.params.q
        t = self.index_T
        return {
            "m": m,
            "index_M": self.M_table.index,
            "index_S": self.index_S,
            "index_T": t,
            "index_U": self.index_U_formula(),
            "index_U_log10": round(math.log10(t) + (t + 1) * math.log10(q), 6),
            "index_K": self.index_K_formula(),
            "index_K_bound": self.index_K_bound_formula(),
            "image_T_mod4": self.image_mod4,
            "S_divides_4m4": (4 * m ** 4) % self.index_S == 0,
            "T_divides_36m4": (36 * m ** 4) % t == 0,
            "K_divides_bound": (144 * m ** 4) % (t * self.image_mod4) == 0 and t + 1 <= 36 * m ** 4 + 1,
            "q_coprime_6S": (6 * self.index_S) % q != 0,
        }

    def envelope(self) -> dict:
        return {
            "config": self.config.to_json(),
            "config_hash": self.config.digest(),
            "tables": {name: t.content_hash() for name, t in self._tables().items()},
            "indices": {k: (str(v) if isinstance(v, int) and not isinstance(v, bool) else v)
                        for k, v in self.index_summary().items()},
            "checks": self.checks,
        }

    def _tables(self) -> dict[str, CosetTable]:
        return {"Mq": self.level.m_table, "M": self.M_table, "S": self.S_table, "T": self.T_table}


def _sample_words(rng: random.Random, n: int, max_len: int) -> list[Word]:
    return [random_word(XY, rng.randint(0, max_len), rng) for _ in range(n)]


def _planted(t: CosetTable, rng: random.Random, max_len: int) -> Word:
    """A random element of the subgroup tabulated by t."""
    w = random_word(XY, rng.randint(1, max_len), rng)
    return w * t.transversal(t.run(0, w)).inverse()


def build_k_oracle(cfg: PipelineConfig, cache: TableCache | None = None, log: Callable[[str], None] | None = None) -> KOracle:
    v = check_params(cfg)
    say = log or (lambda s: None)
    level = build_m_level(cfg.nspec, cfg.params.p)
    if level.m != v.m:
        raise AssertionError(f"|Phi/Mq| = {level.m}, expected {v.m}")
    checks: dict = {"order_Phi_mod_Mq": level.m, "cyclic_normal_property": check_cyclic_normal_property(level)}
    say(f"Phi/Mq has order {level.m}")
    key = content_hash({"what": "pullback", "Mq": level.m_table.content_hash()})
    M = cache.get(key) if cache else None
    if M is None:
        pull = SubgroupOracle(lambda w: (lambda s: s == 0)(_transport_state(level, w)), XY, "M")
        M = coset_table_from_oracle(pull, bound=4 * level.m, label="M")
        if cache:
            cache.put(key, M)
    say(f"[F:M] = {M.index}")
    checks["index_M_divides_4m"] = (4 * level.m) % M.index == 0
    cols = [list(c) for c in M.fwd]
    key_s = content_hash({"what": "core", "M": M.content_hash()})
    S = cache.get(key_s) if cache else None
    if S is None:
        S = coset_table_from_hom(PermGroup(cols), XY, label="S", keep_elements=False, max_index=cfg.max_states)
        if cache:
            cache.put(key_s, S)
    say(f"[F:S] = {S.index}")
    key_t = content_hash({"what": "core6", "M": M.content_hash()})
    T = cache.get(key_t) if cache else None
    if T is None:
        T = coset_table_from_hom(PermGroup(_perm_with_blocks(cols)), XY, label="T", keep_elements=False,
                                 max_index=cfg.max_states)
        if cache:
            cache.put(key_t, T)
    say(f"[F:T] = {T.index}")
    k = KOracle(cfg, v.n, v.m, level, M, S, T, _image_mod4(T), checks)
    summ = k.index_summary()
    for name in ("S_divides_4m4", "T_divides_36m4", "K_divides_bound", "q_coprime_6S"):
        checks[name] = summ[name]
    if not summ["q_coprime_6S"]:
        raise ParamError(f"q divides 6[F:S] = {6 * S.index}")
    checks.update(_cross_checks(k, random.Random(cfg.seed)))
    return k


def _transport_state(level: MLevel, w: Word) -> int | None:
    h = transport(w)
    return None if h is None else level.m_table.run(0, h)


def _cross_checks(k: KOracle, rng: random.Random, n: int = 200) -> dict:
    """Tables agree with the defining predicates on random and planted words."""
    core4 = oracle_core4(SubgroupOracle(k.in_pullback, XY, "M"))
    out = {}
    words = _sample_words(rng, n, 24) + [_planted(k.S_table, rng, 24) for _ in range(n)]
    out["core_table_matches_conjugates"] = all(core4(w) == k.in_core(w) for w in words)
    mw = _sample_words(rng, n, 24) + [_planted(k.M_table, rng, 24) for _ in range(n)]
    out["pullback_table_matches_transport"] = all(k.M_table.contains(w) == k.in_pullback(w) for w in mw)
    tw = words + [_planted(k.T_table, rng, 24) for _ in range(n)]
    out["core6_table_matches_definition"] = all(
        k.in_core6(w) == (k.in_core(w) and not any(exponent_vector(w, 6))) for w in tw)
    return out


# ---------------------------------------------------------------------------
# audits


@dataclass
class AuditReport:
    name: str
    passed: bool
    counts: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"name": self.name, "pass": self.passed, "counts": self.counts,
                "witnesses": self.witnesses, "failures": self.failures}


_INVARIANCE_MAPS = {
    "a": AUT_A,
    "b": AUT_B,
    "inner x": inner(XY.gen(0)),
    "inner y": inner(XY.gen(1)),
}


def _k_samples(k: KOracle, rng: random.Random, trials: int, max_len: int) -> list[tuple[str, Word]]:
    q = k.config.params.q
    short = max(4, max_len // 3)
    out = []
    for i in range(trials):
        kind = i % 4
        if kind == 0:
            out.append(("random", random_word(XY, rng.randint(0, max_len), rng)))
        elif kind == 1:
            t1, t2 = _planted(k.T_table, rng, short), _planted(k.T_table, rng, short)
            out.append(("commutator", commutator(t1, t2)))
        elif kind == 2:
            out.append(("power", _planted(k.T_table, rng, short) ** (4 * q)))
        else:
            t = _planted(k.T_table, rng, short)
            out.append(("near", t ** q * random_word(XY, rng.randint(1, 4), rng)))
    return out


def audit_invariance(k: KOracle, trials: int | None = None, seed: int | None = None) -> AuditReport:
    trials = k.config.invariance_trials if trials is None else trials
    seed = k.config.seed if seed is None else seed
    rng = random.Random(seed)
    samples = _k_samples(k, rng, trials, k.config.max_len)
    counts = {"trials": trials, "members": 0, "non_members": 0, "level4_inside_K": 0, "u_in_l_checked": 0}
    failures = []
    for kind, w in samples:
        inside = k.contains(w)
        counts["members" if inside else "non_members"] += 1
        for name, f in _INVARIANCE_MAPS.items():
            if k.contains(f(w)) != inside:
                failures.append({"word": str(w), "map": name, "member": inside})
        if inside and not k.in_level4(w):
            failures.append({"word": str(w), "map": "containment in level 4"})
        if k.in_core6_q(w):
            counts["u_in_l_checked"] += 1
            if not k.in_transport_l(w):
                failures.append({"word": str(w), "map": "U inside transported L"})
    counts["level4_inside_K"] = counts["members"]
    ok = not failures and counts["members"] > 0 and counts["non_members"] > 0
    return AuditReport("invariance", ok, counts, [], failures[:20])


def _theorem_samples_trivial(k: KOracle, rng: random.Random, n: int) -> list[tuple[str, FreeMap]]:
    out = []
    while len(out) < n:
        length = rng.randint(1, 6)
        desc, sigma = random_automorphism(rng, length)
        if not sanov_membership(theta(sigma)):
            out.append((desc, sigma))
    return out


def _theorem_samples_quotient(k: KOracle, rng: random.Random, n: int) -> list[tuple[str, FreeMap]]:
    nt = k.level.n_table
    out = []
    while len(out) < n:
        even = len(out) % 2 == 1
        h = random_word(AB, rng.randint(1, 8), rng)
        if even:
            ev = exponent_vector(h, 2)
            # force even exponent sums, so theta(nu0(h)) = I mod 4
            for g, e in enumerate(ev):
                if e:
                    h = h * AB.gen(g)
        if h.is_identity() or nt.contains(h):
            continue
        out.append((str(h), nu0(h)))
    return out


def audit_theorem(k: KOracle, samples: int | None = None, seed: int | None = None) -> AuditReport:
    """Every sampled automorphism outside the target normal subgroup moves x or y off K."""
    samples = k.config.theorem_samples if samples is None else samples
    seed = k.config.seed if seed is None else seed
    rng = random.Random(seed + 1)
    if k.n == 1:
        cands = _theorem_samples_trivial(k, rng, samples)
    else:
        cands = _theorem_samples_quotient(k, rng, samples)
    witnesses, failures = [], []
    counts = {"samples": len(cands), "via_level4": 0, "via_core6_q": 0, "congruent_mod4": 0}
    for desc, sigma in cands:
        found = None
        if congruence_check(theta(sigma), 4):
            counts["congruent_mod4"] += 1
        for g in XY.gens():
            d = sigma(g) * g.inverse()
            if not k.contains(d):
                found = (str(g), "level4" if not k.in_level4(d) else "core6_q")
                break
        if found is None:
            failures.append({"sigma": desc})
        else:
            counts["via_level4" if found[1] == "level4" else "via_core6_q"] += 1
            witnesses.append({"sigma": desc, "generator": found[0], "outside": found[1]})
    ok = not failures and len(cands) == samples
    return AuditReport("congruence", ok, counts, witnesses, failures)


# ---------------------------------------------------------------------------


@dataclass
class GeneralReduction:
    q_index: int
    p: int
    index_R_formula: str
    index_bound_formula: str | None
    faithful: bool
    transcript: list
    oracle: SubgroupOracle


def reduce_general_N(char_table: CosetTable, p: int, k: KOracle | None = None) -> GeneralReduction:
    """Combine a K for the Int F-containing case with R = Q^p[Q, Q].

    ``char_table`` tabulates a characteristic subgroup Q of finite index.
    Conjugation by t_s acts faithfully on Q/R for s != e, so an inner
    automorphism acting trivially on F/R comes from Q.
    """
    idx = char_table.index
    if idx % p == 0 or not la.is_prime(p):
        raise ParamError(f"p = {p} must be a prime not dividing [F:Q] = {idx}")
    mq = MetabelianQuotient(char_table, p)
    eye = np.eye(mq.rank, dtype=np.int64)
    faithful = all(np.any((mq.rho[s] - eye) % p) for s in range(1, idx))

    def in_R(w):
        s, vec = char_table.scan(0, w, p)
        return s == 0 and not vec

    contains = (lambda w: in_R(w) and k.contains(w)) if k is not None else in_R
    r_formula = f"{idx} * {p}^{mq.rank}"
    bound = None
    if k is not None:
        bound = f"[{k.index_K_formula()}] * [{r_formula}]"
    transcript = [
        f"Q has index {idx}; R = Q^{p}[Q,Q] has index {r_formula}",
        "conjugation action of F/Q on Q/R is faithful" if faithful else "conjugation action NOT faithful",
        "if Int h acts trivially on F/R then h lies in Q",
        "an automorphism in the congruence subgroup of K cap R factors as s Int h with s in the target and h in Q",
    ]
    return GeneralReduction(idx, p, r_formula, bound, faithful, transcript,
                            SubgroupOracle(contains, XY, "K cap R" if k else "R"))
