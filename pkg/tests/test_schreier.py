import json
import random

import pytest
from hypothesis import given, settings

from autf2.freeprod import PSI
from autf2.schreier import (
    BoundExceeded,
    CosetTable,
    FiniteGroup,
    PermGroup,
    SubgroupOracle,
    TableCache,
    coset_table_from_action,
    coset_table_from_hom,
    coset_table_from_oracle,
    cyclic_perm,
    direct_sum_perms,
    normal_core,
    oracle_conjugate,
    oracle_intersect,
    reidemeister_rewrite,
    schreier_generators,
    table_oracle,
    verbal_oracle,
)
from autf2.words import XY, evaluate_word, exponent_vector, random_word
from conftest import xy_words

S3 = [[1, 0, 2], [1, 2, 0]]          # transposition, 3-cycle
A4 = [[1, 2, 0, 3], [1, 0, 3, 2]]


def closure_order(perms):
    # plain orbit closure of the identity under right multiplication
    n = len(perms[0])
    ident = tuple(range(n))
    seen = {ident}
    todo = [ident]
    while todo:
        e = todo.pop()
        for p in perms:
            f = tuple(p[i] for i in e)
            if f not in seen:
                seen.add(f)
                todo.append(f)
    return len(seen)


def perm_eval(perms, w):
    n = len(perms[0])
    cur = list(range(n))
    for g, s in w.letters():
        p = perms[g]
        if s < 0:
            q = [0] * n
            for i, j in enumerate(p):
                q[j] = i
            p = q
        cur = [p[i] for i in cur]
    return tuple(cur)


@pytest.mark.parametrize("perms", [S3, A4, [cyclic_perm(5), cyclic_perm(5, 2)]])
def test_regular_table_index_and_rank(perms):
    t = coset_table_from_hom(PermGroup(perms), XY)
    t.check()
    assert t.index == closure_order(perms)
    # Schreier: free of rank 1 + index (n - 1)
    assert t.rank == 1 + t.index
    for g in schreier_generators(t):
        assert perm_eval(perms, g) == tuple(range(len(perms[0])))


def test_bfs_order_and_transversal_prefix_closed():
    t = coset_table_from_hom(PermGroup(A4), XY)
    ts = t.transversals
    assert str(ts[1]) == "x" and str(ts[2]) == "y"
    for s in range(1, t.index):
        assert t.run(0, ts[s]) == s
    # prefix closure: dropping the last letter gives the parent's word
    for s in range(1, t.index):
        letters = list(ts[s].letters())
        assert XY.make(letters[:-1]) == ts[t.parent[s]]


def test_positive_only_transversal():
    t = coset_table_from_hom(PermGroup([cyclic_perm(4), cyclic_perm(4, 0)]), XY, inverses=False)
    assert [str(w) for w in t.transversals] == ["1", "x", "x^2", "x^3"]


TABLE = coset_table_from_hom(PermGroup(A4), XY)


@settings(max_examples=60)
@given(xy_words)
def test_rewrite_round_trip(w):
    # push w into the subgroup, rewrite, substitute back
    h = w * TABLE.transversal(TABLE.run(0, w)).inverse()
    r = reidemeister_rewrite(TABLE, h)
    assert evaluate_word(r, schreier_generators(TABLE)) == h


@settings(max_examples=60)
@given(xy_words)
def test_scan_matches_rewrite(w):
    end, vec = TABLE.scan(0, w)
    end2, r = TABLE.rewrite(w)
    assert end == end2
    expect = {}
    for j, s in r.letters():
        expect[j] = expect.get(j, 0) + s
    assert vec == {j: c for j, c in expect.items() if c}


def test_rewrite_rejects_non_member():
    with pytest.raises(ValueError):
        reidemeister_rewrite(TABLE, XY.gen(0))


def test_oracle_enumeration_matches_hom():
    o = table_oracle(TABLE)
    t2 = coset_table_from_oracle(o, bound=20)
    assert t2.index == 12
    rng = random.Random(3)
    for _ in range(200):
        w = random_word(XY, rng.randint(0, 15), rng)
        assert t2.contains(w) == TABLE.contains(w)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_verbal_subgroup_index(k):
    t = coset_table_from_oracle(verbal_oracle(k), bound=k * k)
    assert t.index == k * k


def test_bound_and_clash_detection():
    with pytest.raises(BoundExceeded):
        coset_table_from_oracle(verbal_oracle(3), bound=8)
    # exponent sum of x in {0, 2} mod 5 is not closed under products
    not_a_subgroup = SubgroupOracle(lambda w: exponent_vector(w, 5)[0] in (0, 2), XY, "not closed")
    with pytest.raises(ValueError, match="edge clash"):
        coset_table_from_oracle(not_a_subgroup, bound=50)


def test_stabilizer_and_core():
    t = coset_table_from_action(S3, XY)
    assert t.index == 3
    core = normal_core(t)
    assert core.index == 6
    rng = random.Random(5)
    for _ in range(100):
        w = random_word(XY, rng.randint(0, 10), rng)
        conj_all = all(t.contains(t.transversal(s) * w * t.transversal(s).inverse()) for s in range(3))
        assert core.contains(w) == conj_all


def test_intersection_and_conjugate_oracles():
    o = oracle_intersect(verbal_oracle(2), verbal_oracle(3))
    assert coset_table_from_oracle(o, bound=36).index == 36
    stab = table_oracle(coset_table_from_action(S3, XY))
    x = XY.gen(0)
    c = oracle_conjugate(stab, x)
    w = XY.parse("y x y")
    assert c(w) == stab(x.inverse() * w * x)


def test_direct_sum_perm():
    assert direct_sum_perms([1, 0], [1, 2, 0]) == [1, 0, 3, 4, 2]


def test_nongenerating_images_rejected():
    # both generators land in the subgroup of order 3 of Z/6
    g = FiniteGroup([(2,), (4,)], lambda a, b: ((a[0] + b[0]) % 6,), (0,), order=6)
    with pytest.raises(ValueError):
        coset_table_from_hom(g, XY)


def test_free_product_table():
    g = PermGroup([[1, 0]] * 3)
    t = coset_table_from_hom(g, PSI)
    assert t.index == 2
    # index-2 subgroup of Z2*Z2*Z2: z1 is the tree edge, z2 and z3 cross
    # from both cosets
    assert t.rank == 4


def test_json_round_trip_and_cache(tmp_path):
    d = TABLE.to_json()
    t2 = CosetTable.from_json(json.loads(json.dumps(d)))
    assert t2.content_hash() == TABLE.content_hash()
    assert t2.transversals == TABLE.transversals
    cache = TableCache(tmp_path)
    p = cache.put("k", TABLE)
    assert cache.get("k").content_hash() == TABLE.content_hash()
    assert cache.get("missing") is None
    blob = json.loads(open(p).read())
    blob["table"]["action"][0][0], blob["table"]["action"][0][1] = blob["table"]["action"][0][1], blob["table"]["action"][0][0]
    open(p, "w").write(json.dumps(blob))
    with pytest.raises(ValueError):
        cache.get("k")
