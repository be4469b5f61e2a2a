import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autf2.freeprod import (
    AUT_A,
    AUT_B,
    LIFT_A,
    LIFT_A_INV,
    LIFT_B,
    LIFT_B_INV,
    PSI,
    UVW_A,
    UVW_B,
    FPAlphabet,
    embed_F,
    epsilon_image,
    fp_reduce,
    in_fprime,
    in_theta,
    kappa0,
    kill_v,
    push_action_table,
    rewrite_in_uvw,
    rewrite_to_F,
    uvw_to_psi,
    verify_psi_lifts,
    verify_push_action,
    verify_quotient_inner_action,
    verify_uvw_action,
)
from autf2.words import AB, UVW, XY, compose, inner
from conftest import words_over, xy_words

psi_raw = st.lists(st.tuples(st.integers(0, 2), st.sampled_from([1, -1])), max_size=24)
psi_words = psi_raw.map(PSI.make)


def naive_psi(letters):
    # z_i = z_i^-1, so exponent signs are irrelevant; cancel equal neighbours
    out = []
    for g, _ in letters:
        if out and out[-1] == g:
            out.pop()
        else:
            out.append(g)
    return out


@given(psi_raw)
def test_reduction_matches_naive(seq):
    w = fp_reduce(seq, PSI)
    assert [g for g, _ in w.syllables] == naive_psi(seq)
    assert all(e == 1 for _, e in w.syllables)


@given(psi_words, psi_words, psi_words)
def test_group_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert (a * a.inverse()).is_identity()
    assert a.inverse() == PSI.make([(g, 1) for g, _ in reversed(a.syllables)])


def test_mixed_orders():
    A = FPAlphabet(("s", "t"), (2, 3))
    t = A.gen(1)
    assert (t ** 3).is_identity()
    assert str(t ** 2) == "t^2" and t ** 2 == t.inverse()
    assert (A.gen(0) * A.gen(0)).is_identity()


def test_embedding_values():
    x, y = XY.gens()
    assert str(embed_F(x)) == "z1 z2"
    assert str(embed_F(y)) == "z2 z3"


@given(xy_words)
def test_embedding_round_trip(w):
    img = embed_F(w)
    assert in_theta(img)
    assert rewrite_to_F(img) == w
    # constant-parity words inside the image
    assert len(img) % 2 == 0


@given(psi_words)
def test_theta_is_even_length(w):
    assert in_theta(w) == (len(w) % 2 == 0)


@given(psi_words)
def test_fprime_is_constant_parity(w):
    eps = epsilon_image(w)
    assert in_fprime(w) == (eps[0] == eps[1] == eps[2])
    if in_fprime(w):
        assert uvw_to_psi(rewrite_in_uvw(w)) == w


@given(words_over(UVW, 10))
def test_uvw_round_trip(w):
    assert rewrite_in_uvw(uvw_to_psi(w)) == w


@given(psi_words, psi_words)
def test_lifts_are_automorphisms(a, b):
    for m, mi in ((LIFT_A, LIFT_A_INV), (LIFT_B, LIFT_B_INV)):
        assert m(a * b) == m(a) * m(b)
        assert m(mi(a)) == a == mi(m(a))


@given(xy_words)
def test_lifts_extend(w):
    assert LIFT_A(embed_F(w)) == embed_F(AUT_A(w))
    assert LIFT_B(embed_F(w)) == embed_F(AUT_B(w))


@settings(max_examples=40)
@given(words_over(AB, 5), words_over(UVW, 6))
def test_kappa0_matches_lifts(h, w):
    # compose the lifts along h, leftmost letter applied last
    img = uvw_to_psi(w)
    for g, s in reversed(list(h.letters())):
        m = (LIFT_A, LIFT_B)[g] if s > 0 else (LIFT_A_INV, LIFT_B_INV)[g]
        img = m(img)
    assert uvw_to_psi(kappa0(h)(w)) == img


def test_restricted_lift_values():
    assert [str(i) for i in UVW_A.images] == ["w^-1 u w", "v", "w^-1 u^-1 w u w"]
    assert [str(i) for i in UVW_B.images] == ["u", "v", "u^-1 v^-1 w v u"]


def test_kill_v():
    assert str(kill_v(UVW.parse("u v w v^-1"))) == "ubar wbar"


@pytest.mark.parametrize("fn", [verify_psi_lifts, verify_uvw_action, verify_quotient_inner_action])
def test_symbolic_suites(fn):
    bad = [c for c in fn() if not c.passed]
    assert not bad, bad


def test_push_action():
    checks, table = verify_push_action()
    assert all(c.passed for c in checks)
    assert table == {"u": "v u v^-1", "v": "v u v u^-1 v^-1", "w": "w"}
    # conjugation convention: inner(g)(h) = g^-1 h g
    g = UVW.parse("u^-1 v^-1")
    assert push_action_table() == compose(inner(g), UVW_B)


def test_commutator_fixed():
    c = XY.parse("x y x^-1 y^-1")
    assert AUT_A(c) == c and AUT_B(c) == c
