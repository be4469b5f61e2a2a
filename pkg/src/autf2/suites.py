"""Registry of verification claims grouped into suites.

Each claim is a zero-argument callable (looked up by id, so it can be sent
to worker processes) returning ``(passed, witness)``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

from . import foxcalc, freeprod, quotients, sl2
from .schreier import coset_table_from_hom
from .words import AB, XY, commutator, compose

__all__ = ["Claim", "SUITES", "CLAIMS", "claims_for", "run_claim"]


@dataclass(frozen=True)
class Claim:
    claim_id: str
    anchor: str
    func: Callable[[], tuple[bool, dict]]


CLAIMS: dict[str, Claim] = {}
SUITES: dict[str, list[str]] = {}


def claim(suite: str, claim_id: str, anchor: str):
    def deco(f):
        CLAIMS[claim_id] = Claim(claim_id, anchor, f)
        SUITES.setdefault(suite, []).append(claim_id)
        return f
    return deco


def _checks(cs) -> tuple[bool, dict]:
    bad = [c.to_json() for c in cs if not c.passed]
    return not bad, {"checked": len(cs), "failed": bad}


# -- symbolic -----------------------------------------------------------------


@claim("symbolic", "words.commutator_fixed", "automorphisms a, b fix the commutator [x, y]")
def _c_fixed():
    x, y = XY.gens()
    c = commutator(x, y)
    ok = str(c) == "x y x^-1 y^-1" and freeprod.AUT_A(c) == c and freeprod.AUT_B(c) == c
    ab = compose(freeprod.AUT_A, freeprod.AUT_B)
    ok = ok and str(freeprod.AUT_A(y)) == "y x^2" and ab(x) == XY.parse("x y x^2 y x^2")
    return ok, {"c": str(c), "a(c)": str(freeprod.AUT_A(c)), "b(c)": str(freeprod.AUT_B(c))}


@claim("symbolic", "freeprod.embedding", "x -> z1 z2, y -> z2 z3 and the index-2 subgroup")
def _embedding():
    c = commutator(*XY.gens())
    img = freeprod.embed_F(c)
    from .freeprod import _rewriters
    r = _rewriters()
    gens = sorted(str(r.theta.schreier_word(j)) for j in range(r.theta.rank))
    ok = str(img) == "z1 z3 z2 z1 z3 z2" and gens == sorted(["z2 z1", "z3 z1", "z1 z2", "z1 z3"])
    ok = ok and [str(w) for w in r.theta.transversals] == ["1", "z1"]
    return ok, {"embed(c)": str(img), "generators": gens}


@claim("symbolic", "freeprod.uvw_basis", "constant-parity subgroup is free on u, v, w")
def _uvw_basis():
    from .freeprod import _rewriters, uvw_to_psi
    r = _rewriters()
    gens = [r.fprime.schreier_word(j) for j in range(r.fprime.rank)]
    images = [str(r.fprime_images[j]) for j in range(r.fprime.rank)]
    ok = sorted(images) == sorted(["u", "v", "w", "u^-1", "v^-1", "w^-1"])
    ok = ok and all(uvw_to_psi(im) == g for g, im in zip(gens, r.fprime_images))
    ok = ok and [str(w) for w in r.fprime.transversals] == ["1", "z1", "z2", "z3"]
    return ok, {"generators": [str(g) for g in gens], "as_uvw": images}


@claim("symbolic", "freeprod.lifts", "lifts of a, b to the free product of involutions")
def _lifts():
    return _checks(freeprod.verify_psi_lifts())


@claim("symbolic", "freeprod.uvw_action", "restricted lifts on the basis u, v, w")
def _uvw_action():
    return _checks(freeprod.verify_uvw_action())


@claim("symbolic", "freeprod.quotient_inner", "action modulo v is inner by ubar wbar and ubar")
def _quot_inner():
    return _checks(freeprod.verify_quotient_inner_action())


@claim("symbolic", "freeprod.push_action", "push-map action versus the restricted lifts")
def _push():
    cs, table = freeprod.verify_push_action()
    ok, w = _checks(cs)
    w["b_action_table"] = table
    return ok, w


@claim("symbolic", "sl2.homology", "homology matrices equal theta of the generators")
def _homology():
    r = sl2.verify_homology_action()
    return r.passed, {k: [list(row) for row in v] for k, v in r.details.items()}


# -- metabelian quotients -------------------------------------------------------


def _centralizers(name):
    def f():
        g, p = quotients.CENTRALIZER_CASES[name]
        r = quotients.verify_centralizer_case(g(), p, name)
        return r.passed, r.details
    return f


for _name in quotients.CENTRALIZER_CASES:
    claim("centralizers", f"quotients.centralizers.{_name}", "generator centralizers and abelian normal subgroups")(_centralizers(_name))


def _commutator(group_fn, p):
    def f():
        r = quotients.verify_commutator_centralizer(group_fn(), p)
        return r.passed, r.details
    return f


_COMMUTATOR_CASES = {
    "trivial.p5": (lambda: None, 5),
    "trivial.p7": (lambda: None, 7),
    "Z2.p5": (lambda: quotients.cyclic_group(2, [1, 1]), 5),
    "S3.p5": (lambda: quotients.symmetric_group([[1, 0, 2], [1, 2, 0]], "S3"), 5),
}
for _name, (_g, _p) in _COMMUTATOR_CASES.items():
    claim("commutator", f"quotients.commutator.{_name}", "commutator centralizer modulo the metabelian layer")(_commutator(_g, _p))


def _power(m, p):
    def f():
        r = quotients.verify_power_centralizer(m, p)
        return r.passed, r.details
    return f


for _m, _p in ((3, 2), (4, 3), (1, 3)):
    claim("commutator", f"quotients.power.m{_m}.p{_p}", "centralizer of a power of a generator")(_power(_m, _p))


# -- fox ------------------------------------------------------------------------


def _fox_case(name):
    def f():
        g, p = quotients.CENTRALIZER_CASES[name]
        t = coset_table_from_hom(g(), XY)
        q = quotients.MetabelianQuotient(t, p)
        rs = [foxcalc.verify_exactness(t, p), foxcalc.verify_fixed_dim(q),
              foxcalc.verify_product_rule(t, p, 1000, seed=11),
              foxcalc.verify_fox_matches_rewriting(q, 300, seed=12)]
        return all(r.passed for r in rs), {r.name: r.details for r in rs}
    return f


for _name in quotients.CENTRALIZER_CASES:
    claim("fox", f"foxcalc.{_name}", "relation module exact sequence mod p")(_fox_case(_name))


@claim("fox", "foxcalc.trivial_group", "relation module of the whole group")
def _fox_trivial():
    t = coset_table_from_hom(quotients.cyclic_group(1, [0, 0]), XY)
    r = foxcalc.verify_exactness(t, 3)
    return r.passed, r.details


@claim("fox", "foxcalc.power_rows", "Fox row of x^m in ker(x -> 1 in Z/m)")
def _fox_power():
    rs = [foxcalc.verify_power_row(m, p) for m, p in ((3, 2), (4, 3), (5, 2), (1, 3))]
    return all(r.passed for r in rs), {r.name: r.details for r in rs}


# -- sanov ----------------------------------------------------------------------


@claim("sanov", "sl2.level4", "level-4 congruence kernel lies in <A, B>")
def _level4():
    r = sl2.verify_level4_in_sanov()
    return r.passed, r.details


@claim("sanov", "sl2.minus_identity", "-I is not in the free group <A, B>")
def _minus_i():
    r = sl2.sanov_membership(((-1, 0), (0, -1)))
    return not r, {"certificate": str(r)}


@claim("sanov", "sl2.round_trip", "reduced words in A, B are recovered")
def _round():
    r = sl2.verify_sanov_round_trip(8)
    return r.passed, r.details


@claim("sanov", "sl2.injective", "theta of nu0 on short words")
def _inj():
    r = sl2.verify_theta_nu0_injective(8)
    return r.passed, r.details


@claim("sanov", "sl2.level4_criterion", "matrix test mod 4 against the generator-word definition")
def _crit():
    r = sl2.verify_level4_criterion(1000, seed=5)
    return r.passed, r.details


def claims_for(suite: str) -> list[str]:
    if suite == "none":
        return []
    if suite == "all":
        return [c for s in ("symbolic", "centralizers", "commutator", "fox", "sanov") for c in SUITES[s]]
    if suite not in SUITES:
        raise KeyError(suite)
    return list(SUITES[suite])


def run_claim(claim_id: str) -> tuple[bool, dict]:
    return CLAIMS[claim_id].func()
