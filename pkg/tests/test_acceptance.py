"""Acceptance criteria, one check per criterion.

Each check returns (passed, detail); the pytest wrapper records a
``PASS``/``FAIL`` line that is printed in the terminal summary.  Running
this file directly prints the same lines.
"""
import resource
import time

import pytest

from autf2 import foxcalc, freeprod, quotients, sl2
from autf2.cli import main
from autf2.pipeline import CONFIG_A, CONFIG_B, audit_invariance, audit_theorem, build_k_oracle, has_nontrivial_cyclic_normal
from autf2.schreier import coset_table_from_hom
from autf2.suites import claims_for, run_claim
from autf2.words import AB, XY

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []


def _suite(name):
    bad = []
    for cid in claims_for(name):
        ok, w = run_claim(cid)
        if not ok:
            bad.append(cid)
    return bad


def criterion_1():
    t0 = time.perf_counter()
    bad = _suite("symbolic")
    secs = time.perf_counter() - t0
    return not bad and secs < 1.0, f"symbolic identities, failures={bad}, {secs:.2f}s (< 1s)"


def criterion_2():
    t0 = time.perf_counter()
    out = []
    for name, (g, p) in sorted(quotients.CENTRALIZER_CASES.items()):
        r = quotients.verify_centralizer_case(g(), p, name)
        gens = r.details["generators"]
        # brute force must have run (and agreed) whenever the order allows it
        brute = r.details["order"] > 10 ** 4 or all(gens[x].get("brute_agrees") for x in "xy")
        out.append((name, r.passed and brute))
    secs = time.perf_counter() - t0
    return all(ok for _, ok in out), f"centralizers and abelian normal subgroups {dict(out)}, {secs:.1f}s"


def criterion_3():
    t0 = time.perf_counter()
    cases = [(None, 5), (None, 7), (quotients.cyclic_group(2, [1, 1]), 5)]
    res = []
    for g, p in cases:
        r = quotients.verify_commutator_centralizer(g, p)
        d = r.details
        ok = r.passed and d["L_index"] <= 72 and d["squares_in_cyclic"] and d["cubes_in_cyclic"]
        res.append((d["L_index"], p, ok))
    secs = time.perf_counter() - t0
    return all(ok for *_, ok in res) and secs < 60, f"(index, p, ok) = {res}, {secs:.1f}s"


def criterion_4():
    # exactness ranks, fixed dimension, 1000-pair product rule, power rows
    bad = []
    for name, (g, p) in sorted(quotients.CENTRALIZER_CASES.items()):
        t = coset_table_from_hom(g(), XY)
        ex = foxcalc.verify_exactness(t, p)
        if not (ex.passed and ex.details["r"] + t.index - 1 == 2 * t.index):
            bad.append(f"exactness {name}")
        if not foxcalc.verify_fixed_dim(quotients.MetabelianQuotient(t, p)).passed:
            bad.append(f"fixed dim {name}")
        if not foxcalc.verify_product_rule(t, p, 1000, seed=11).passed:
            bad.append(f"product rule {name}")
    for m, p in ((1, 3), (2, 3), (3, 2), (4, 3), (5, 2)):
        if not foxcalc.verify_power_row(m, p).passed:
            bad.append(f"power row {m},{p}")
    return not bad, f"Fox calculus, failures={bad}"


def criterion_5():
    t0 = time.perf_counter()
    lv = sl2.verify_level4_in_sanov()
    minus = not sl2.sanov_membership(((-1, 0), (0, -1)))
    rt = sl2.verify_sanov_round_trip(8)
    inj = sl2.verify_theta_nu0_injective(8)
    secs = time.perf_counter() - t0
    ok = lv.passed and lv.details["generators"] <= 96 and minus and rt.passed and inj.passed and secs < 10
    return ok, (f"{lv.details['generators']} level-4 generators accepted, -I rejected={minus}, "
                f"{rt.details['words']} words round-trip, injective={inj.passed}, {secs:.1f}s")


def criterion_6():
    t0 = time.perf_counter()
    k = build_k_oracle(CONFIG_A)
    inv = audit_invariance(k)
    thm = audit_theorem(k)
    secs = time.perf_counter() - t0
    rss_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    t = k.index_T
    ok = (236196 % t == 0 and k.index_U_formula() == f"{t} * 5^{t + 1}" and inv.passed and thm.passed
          and inv.counts["trials"] == 1000 and thm.counts["samples"] == 100 and secs < 600 and rss_mb < 2048)
    return ok, (f"[F:T]={t} | 236196, [F:U]={k.index_U_formula()}, invariance failures={len(inv.failures)}, "
                f"congruence audit failures={len(thm.failures)}, {secs:.1f}s, peak rss {rss_mb:.0f} MB")


def criterion_7(tmp_dir):
    k = build_k_oracle(CONFIG_B)
    cyc = has_nontrivial_cyclic_normal(CONFIG_B.nspec.group())
    m = k.m
    s_ok = (4 * m ** 4) % k.index_S == 0
    t_ok = (36 * m ** 4) % k.index_T == 0
    thm = audit_theorem(k)
    reports = []
    for i in range(2):
        out = f"{tmp_dir}/audit{i}.json"
        code = main(["audit", "--config", "B", "--seed", "0", "--cache-dir", f"{tmp_dir}/cache", "--out", out])
        with open(out, "rb") as fh:
            reports.append((code, fh.read()))
    det = reports[0] == reports[1] and reports[0][0] == 0
    nontrivial = all(not k.level.n_table.contains(AB.parse(w["sigma"])) for w in thm.witnesses)
    ok = not cyc and m == 12 and s_ok and t_ok and thm.passed and len(thm.witnesses) == 100 and nontrivial and det
    return ok, (f"cyclic normal={cyc}, [F:S]={k.index_S} | {4 * m ** 4}, [F:T]={k.index_T} | {36 * m ** 4}, "
                f"witnesses={len(thm.witnesses)}/100, byte-identical reports={det}")


def criterion_8():
    bad = []
    for name, (g, p) in sorted(quotients.CENTRALIZER_CASES.items()):
        q = quotients.MetabelianQuotient(coset_table_from_hom(g(), XY), p)
        if not foxcalc.verify_fox_matches_rewriting(q, 300, seed=12).passed:
            bad.append(name)
    crit = sl2.verify_level4_criterion(1000, seed=5)
    ok = not bad and crit.passed and crit.details["trials"] == 1000
    return ok, f"fox vs crossings failures={bad}, level-4 matrix test disagreements={len(crit.details['disagreements'])}/1000"


def _record(n, result):
    ok, detail = result
    ACCEPTANCE_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    print(ACCEPTANCE_LINES[-1])
    return ok, detail


@pytest.mark.parametrize("n", range(1, 9))
def test_criterion(n, tmp_path):
    f = globals()[f"criterion_{n}"]
    ok, detail = _record(n, f(str(tmp_path)) if n == 7 else f())
    assert ok, detail


if __name__ == "__main__":
    import tempfile
    for n in range(1, 9):
        if n == 7:
            with tempfile.TemporaryDirectory() as d:
                _record(7, criterion_7(d))
        else:
            _record(n, globals()[f"criterion_{n}"]())
