import random
from dataclasses import replace

import pytest
from hypothesis import given, settings

from autf2.freeprod import AUT_A, AUT_B
from autf2.pipeline import (
    CONFIG_A,
    CONFIG_B,
    KOracle,
    NSpec,
    ParamError,
    PipelineConfig,
    PipelineParams,
    audit_invariance,
    audit_theorem,
    build_k_oracle,
    check_params,
    has_nontrivial_cyclic_normal,
    nu0,
    reduce_general_N,
    transport,
)
from autf2.quotients import abelian_group
from autf2.schreier import PermGroup, coset_table_from_action, coset_table_from_hom
from autf2.sl2 import sanov_membership, theta
from autf2.words import AB, XY, compose, exponent_vector
from conftest import words_over, xy_words


def closure_order(perms):
    ident = tuple(range(len(perms[0])))
    seen, todo = {ident}, [ident]
    while todo:
        e = todo.pop()
        for p in perms:
            f = tuple(p[i] for i in e)
            if f not in seen:
                seen.add(f)
                todo.append(f)
    return len(seen)


def exponent_image_size(t, k):
    # subgroup of (Z/k)^2 spanned by exponent sums of the Schreier generators
    gens = {exponent_vector(t.schreier_word(j), k) for j in range(t.rank)}
    span, todo = {(0, 0)}, [(0, 0)]
    while todo:
        a = todo.pop()
        for g in gens:
            c = ((a[0] + g[0]) % k, (a[1] + g[1]) % k)
            if c not in span:
                span.add(c)
                todo.append(c)
    return len(span)


def transport_image_size(k):
    # image of F^2[F,F] in Phi/Mq, generated by the transported Schreier generators
    t2 = coset_table_from_hom(abelian_group(2, [(1, 0), (0, 1)]), XY)
    mt = k.level.m_table
    gens = [mt.run(0, transport(t2.schreier_word(j))) for j in range(t2.rank)]
    span, todo = {0}, [0]
    while todo:
        s = todo.pop()
        for g in gens:
            c = mt.run(s, mt.transversal(g))
            if c not in span:
                span.add(c)
                todo.append(c)
    return len(span)


# -- parameter validation -------------------------------------------------------


@pytest.mark.parametrize("ns,params,msg", [
    (NSpec((0,), (0,)), PipelineParams(q=9, p=3), "not an odd prime"),
    (NSpec((0,), (0,)), PipelineParams(q=5, p=5), "distinct"),
    (NSpec((1, 0, 2), (1, 2, 0)), PipelineParams(q=3, p=5), "divides n"),
    (NSpec((1, 0, 2), (1, 2, 0), "direct"), PipelineParams(q=5), "cyclic normal"),
    (NSpec((1, 2, 0, 3), (1, 0, 3, 2), "direct"), PipelineParams(q=3), "divides n"),
    (NSpec((0,), (0,), "sideways"), PipelineParams(q=5, p=3), "route"),
])
def test_bad_parameters(ns, params, msg):
    with pytest.raises(ParamError, match=msg):
        check_params(PipelineConfig(ns, params))


def test_q_checked_against_core_index():
    # q = 3 passes the static checks but always divides 6 [F:S]
    cfg = PipelineConfig(NSpec((0,), (0,)), PipelineParams(q=3, p=5))
    assert check_params(cfg).m == 25
    with pytest.raises(ParamError, match="6\\[F:S\\]"):
        build_k_oracle(cfg)


def test_valid_parameters():
    assert check_params(CONFIG_A).m == 9
    assert check_params(CONFIG_B).m == 12


def test_cyclic_normal_detection():
    assert not has_nontrivial_cyclic_normal(PermGroup([[1, 2, 0, 3], [1, 0, 3, 2]]))
    assert has_nontrivial_cyclic_normal(PermGroup([[1, 0, 2], [1, 2, 0]]))
    assert has_nontrivial_cyclic_normal(PermGroup([[1, 0], [1, 0]]))


def test_config_round_trip():
    for cfg in (CONFIG_A, CONFIG_B):
        again = PipelineConfig.from_json(cfg.to_json())
        assert again == replace(cfg, max_states=again.max_states)
        assert again.digest() == cfg.digest()
    assert CONFIG_A.digest() != replace(CONFIG_A, seed=1).digest()


# -- transport and nu0 ------------------------------------------------------------


@settings(max_examples=60)
@given(xy_words, xy_words)
def test_transport_is_a_homomorphism(u, v):
    u2, v2 = u * u, v * v
    assert transport(u2 * v2) == transport(u2) * transport(v2)


@given(xy_words)
def test_transport_domain(w):
    assert (transport(w) is None) == any(exponent_vector(w, 2))


@settings(max_examples=30)
@given(words_over(AB, 4), words_over(AB, 4))
def test_nu0_composes(h1, h2):
    x, y = XY.gens()
    m, m1, m2 = nu0(h1 * h2), nu0(h1), nu0(h2)
    assert m(x) == m1(m2(x)) and m(y) == m1(m2(y))
    assert theta(m) == sanov_membership(theta(m)).evaluate()


def test_nu0_generators():
    x, y = XY.gens()
    assert nu0(AB.parse("a"))(y) == AUT_A(y)
    assert nu0(AB.parse("a b"))(x) == compose(AUT_A, AUT_B)(x)


# -- config A --------------------------------------------------------------------------


def test_config_a_indices(k_a):
    # [F:M] = 4 |image of F^2[F,F] in Phi/Mq|; [F:S] = |permutation group of F on F/M|;
    # [F:T] = [F:S] * |image of S in (Z/6)^2|
    assert k_a.m == 9
    assert k_a.M_table.index == 4 * transport_image_size(k_a) == 36
    assert k_a.S_table.index == closure_order([list(c) for c in k_a.M_table.fwd]) == 108
    assert k_a.T_table.index == k_a.S_table.index * exponent_image_size(k_a.S_table, 6) == 972
    assert k_a.image_mod4 == exponent_image_size(k_a.T_table, 4) == 4
    assert 236196 % k_a.index_T == 0
    assert 236196 == 36 * 9 ** 4


def test_config_a_formulas(k_a):
    s = k_a.index_summary()
    assert s["index_U"] == "972 * 5^973"
    assert s["index_K"] == "3888 * 5^973"
    assert s["index_K_bound"] == "944784 * 5^236197"
    assert all(v for v in k_a.checks.values() if isinstance(v, bool))


def test_config_a_membership_consistency(k_a, rng):
    for _ in range(200):
        w = XY.make([(rng.randrange(2), rng.choice((1, -1))) for _ in range(rng.randint(0, 30))])
        if k_a.contains(w):
            assert k_a.in_core6(w) and k_a.in_core(w) and k_a.in_pullback(w) and k_a.in_level4(w)
        if k_a.in_core6_q(w):
            assert k_a.in_core6(w)
            assert k_a.in_transport_l(w)


def test_config_a_audits(k_a):
    inv = audit_invariance(k_a)
    assert inv.passed, inv.failures
    assert inv.counts["trials"] == 1000
    assert inv.counts["members"] > 0 and inv.counts["non_members"] > 0
    thm = audit_theorem(k_a)
    assert thm.passed and thm.counts["samples"] == 100
    # the trivial-quotient branch samples sigma with theta(sigma) outside <A, B>
    assert all(w["outside"] in ("level4", "core6_q") for w in thm.witnesses)


def test_audits_are_deterministic(k_a):
    assert audit_invariance(k_a, 200).to_json() == audit_invariance(k_a, 200).to_json()
    assert audit_theorem(k_a, 30).to_json() == audit_theorem(k_a, 30).to_json()


class _StabilizerK(KOracle):
    """K replaced by a non-normal subgroup: the invariance audit must object."""

    def contains(self, w):
        return self._stab.contains(w)


def test_invariance_audit_negative_control(k_a):
    fake = _StabilizerK(**{f: getattr(k_a, f) for f in k_a.__dataclass_fields__})
    fake._stab = coset_table_from_action([[1, 0, 2], [1, 2, 0]], XY)
    r = audit_invariance(fake, 200)
    assert not r.passed and r.failures


# -- config B --------------------------------------------------------------------


def test_config_b_indices(k_b):
    assert k_b.m == 12
    assert k_b.checks["cyclic_normal_property"] is True
    assert not has_nontrivial_cyclic_normal(CONFIG_B.nspec.group())
    assert k_b.M_table.index == 4 * transport_image_size(k_b) == 48
    assert k_b.S_table.index == closure_order([list(c) for c in k_b.M_table.fwd]) == 9216
    assert k_b.T_table.index == k_b.S_table.index * exponent_image_size(k_b.S_table, 6) == 82944
    assert (4 * 12 ** 4) % k_b.index_S == 0
    assert (36 * 12 ** 4) % k_b.index_T == 0


def test_config_b_theorem_audit(k_b):
    r = audit_theorem(k_b)
    assert r.passed, r.failures
    assert r.counts["samples"] == 100 and len(r.witnesses) == 100
    nt = k_b.level.n_table
    for w in r.witnesses:
        assert not nt.contains(AB.parse(w["sigma"]))


def test_config_b_invariance(k_b):
    r = audit_invariance(k_b, 400)
    assert r.passed, r.failures


# -- general reduction --------------------------------------------------------------


def test_reduce_general_n(k_a):
    q2 = coset_table_from_hom(abelian_group(2, [(1, 0), (0, 1)]), XY)
    red = reduce_general_N(q2, 3, k_a)
    assert red.faithful
    assert red.index_R_formula == "4 * 3^5"
    rng = random.Random(2)
    for _ in range(100):
        w = XY.make([(rng.randrange(2), rng.choice((1, -1))) for _ in range(rng.randint(0, 20))])
        if red.oracle(w):
            assert k_a.contains(w) and q2.contains(w)
    with pytest.raises(ParamError):
        reduce_general_N(q2, 2)
