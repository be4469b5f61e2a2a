import random

from hypothesis import given, settings
from hypothesis import strategies as st

from autf2.freeprod import AUT_A, AUT_B
from autf2.sl2 import (
    IDENTITY,
    MA,
    MB,
    NotMember,
    congruence_check,
    gamma_K0_by_words,
    gamma_K0_test,
    mat_inv,
    mat_mul,
    random_automorphism,
    reduced_words,
    sanov_membership,
    theta,
    verify_homology_action,
    verify_level4_criterion,
    verify_level4_in_sanov,
    verify_sanov_round_trip,
    verify_theta_nu0_injective,
)
from autf2.words import AB, compose

MS = ((0, -1), (1, 0))
MT = ((1, 1), (0, 1))

st_sl2 = st.lists(st.sampled_from([MS, MT, mat_inv(MT)]), max_size=30)


def product(ms):
    out = IDENTITY
    for m in ms:
        out = mat_mul(out, m)
    return out


def in_sanov_by_congruence(m):
    # <A, B> is the index-2 subgroup of the level-2 kernel with a = d = 1 mod 4
    (a, b), (c, d) = m
    return b % 2 == 0 and c % 2 == 0 and a % 4 == 1 and d % 4 == 1


@settings(max_examples=300)
@given(st_sl2)
def test_membership_against_congruence_description(ms):
    m = product(ms)
    r = sanov_membership(m)
    assert bool(r) == in_sanov_by_congruence(m)
    if r:
        assert r.evaluate() == m
    else:
        assert isinstance(r, NotMember) and r.reason


def test_minus_identity_rejected():
    r = sanov_membership(((-1, 0), (0, -1)))
    assert not r
    assert not sanov_membership(((2, 1), (1, 1)))
    assert not sanov_membership(((1, 1), (0, 2)))  # det 2


def test_generators_recovered():
    assert str(sanov_membership(MA)) == "A"
    assert str(sanov_membership(MB)) == "B"
    assert str(sanov_membership(mat_mul(mat_inv(MB), MA))) == "B^-1 A"
    assert str(sanov_membership(IDENTITY)) == "1"


@settings(max_examples=60)
@given(st.integers(0, 10 ** 6))
def test_theta_is_multiplicative_on_maps(seed):
    rng = random.Random(seed)
    _, m1 = random_automorphism(rng, 4)
    _, m2 = random_automorphism(rng, 4)
    assert theta(compose(m1, m2)) == mat_mul(theta(m1), theta(m2))


def test_theta_values():
    assert theta(AUT_A) == ((1, 2), (0, 1))
    assert theta(AUT_B) == ((1, 0), (2, 1))
    assert verify_homology_action().passed


def test_level4_kernel_generators():
    r = verify_level4_in_sanov()
    assert r.passed, r.details
    # |SL2(Z/4)| = 48, Schreier rank 1 + 48 (2 - 1) for the two-generator presentation
    assert r.details["order_mod_level"] == 48
    assert r.details["generators"] == 49 <= 96
    assert not r.details["rejected"]
    assert r.details["index_of_sanov"] == 12


def test_round_trip_length_8():
    r = verify_sanov_round_trip(8)
    assert r.passed
    assert r.details["words"] == 1 + 2 * (3 ** 8 - 1)


def test_theta_nu0_injective():
    r = verify_theta_nu0_injective(8)
    assert r.passed and r.details["words"] == 13121


def test_reduced_words_count():
    assert sum(1 for _ in reduced_words(AB, 3)) == 1 + 4 + 12 + 36


def test_level4_criterion_1000():
    r = verify_level4_criterion(1000, seed=5)
    assert r.passed, r.details
    assert 0 < r.details["in_level4"] < 1000


@settings(max_examples=100)
@given(st.integers(0, 10 ** 6), st.integers(0, 8))
def test_level4_criterion_property(seed, length):
    _, m = random_automorphism(random.Random(seed), length)
    assert gamma_K0_test(m) == gamma_K0_by_words(m)
    assert congruence_check(theta(m), 1)
