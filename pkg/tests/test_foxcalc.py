import numpy as np
import pytest
from hypothesis import given, settings

from autf2.foxcalc import (
    GroupRing,
    fox_coefficients,
    sigma_p_matrix,
    verify_exactness,
    verify_fixed_dim,
    verify_fox_matches_rewriting,
    verify_power_row,
    verify_product_rule,
)
from autf2.quotients import CENTRALIZER_CASES, MetabelianQuotient, cyclic_group
from autf2.schreier import PermGroup, coset_table_from_hom
from autf2.words import XY
from conftest import xy_words

S3 = [[1, 0, 2], [1, 2, 0]]
GROUP = PermGroup(S3)
TABLE = coset_table_from_hom(GROUP, XY, keep_elements=True)


def perm_mul(a, b):
    return tuple(b[i] for i in a)


def perm_inv(a):
    out = [0] * len(a)
    for i, j in enumerate(a):
        out[j] = i
    return tuple(out)


def naive_fox(w):
    # d(uv) = du + u dv, d x_j = delta, d x_j^-1 = -delta x_j^-1; elements as tuples
    gens = [tuple(p) for p in S3]
    coeffs = [{}, {}]
    prefix = (0, 1, 2)
    for g, s in w.letters():
        if s > 0:
            key = prefix
            coeffs[g][key] = coeffs[g].get(key, 0) + 1
            prefix = perm_mul(prefix, gens[g])
        else:
            prefix = perm_mul(prefix, perm_inv(gens[g]))
            coeffs[g][prefix] = coeffs[g].get(prefix, 0) - 1
    return [{k: v for k, v in c.items() if v} for c in coeffs]


@settings(max_examples=80)
@given(xy_words)
def test_fox_matches_naive_definition(w):
    ring = GroupRing(TABLE)
    fi = fox_coefficients(w, ring)
    states = [tuple(e) for e in TABLE.elements]
    for i in range(2):
        got = {states[s]: int(c) for s, c in enumerate(fi.coeffs[i]) if c}
        assert got == naive_fox(w)[i]


@pytest.mark.parametrize("name", sorted(CENTRALIZER_CASES))
def test_exactness_and_fixed_dim(name):
    g, p = CENTRALIZER_CASES[name]
    t = coset_table_from_hom(g(), XY)
    r = verify_exactness(t, p)
    assert r.passed, r.details
    # r + (|G| - 1) = 2|G| for rank-two free groups
    assert r.details["r"] + t.index - 1 == 2 * t.index
    assert verify_fixed_dim(MetabelianQuotient(t, p)).passed


def test_exactness_rejects_dividing_prime():
    with pytest.raises(ValueError):
        verify_exactness(TABLE, 3)


def test_product_rule_1000_pairs():
    r = verify_product_rule(TABLE, 5, 1000, seed=7)
    assert r.passed and r.details["trials"] == 1000


@pytest.mark.parametrize("m,p", [(1, 3), (2, 3), (3, 2), (4, 3), (5, 2)])
def test_power_row(m, p):
    r = verify_power_row(m, p)
    assert r.passed
    row = r.details["row"]
    assert row[:m] == [1] * m and not any(row[m:])


@pytest.mark.parametrize("name", ["Z2", "Z3", "S3"])
def test_fox_agrees_with_quotient_crossings(name):
    g, p = CENTRALIZER_CASES[name]
    q = MetabelianQuotient(coset_table_from_hom(g(), XY), p)
    assert verify_fox_matches_rewriting(q, 300, seed=3).passed


def test_sigma_rows_of_tree_free_generators():
    t = coset_table_from_hom(cyclic_group(2, [1, 1]), XY)
    sig = sigma_p_matrix(t, 3)
    assert sig.shape == (t.rank, 2 * t.index)
    # every Schreier generator maps to the identity of G
    ring = GroupRing(t, 3)
    for j in range(t.rank):
        fi = fox_coefficients(t.schreier_word(j), ring)
        assert fi.end == 0
    assert np.array_equal(sig % 3, sig)
