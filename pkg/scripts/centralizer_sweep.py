"""Generator centralizers in F/N^p[N,N] over small cyclic and symmetric quotients.

Prints one row per (group, p): order of the quotient, whether both
generator centralizers project onto the cyclic subgroups, and whether the
whole case (including the abelian normal subgroup check) passes.
"""
import itertools
import time

from autf2.fp_linalg import is_prime
from autf2.quotients import cyclic_group, symmetric_group, verify_centralizer_case

cases = []
for k in (2, 3, 4, 5, 6):
    for im in ((1, 0), (1, 1), (0, 1)):
        cases.append((f"Z{k}{im}", lambda k=k, im=im: cyclic_group(k, list(im))))
cases.append(("S3", lambda: symmetric_group([[1, 0, 2], [1, 2, 0]], "S3")))

print(f"{'group':14} {'p':>2} {'order':>12} {'gens':>5} {'case':>5} {'secs':>6}")
for (name, g), p in itertools.product(cases, (2, 3, 5, 7)):
    grp = g()
    n = len(grp.elements())
    if n % p == 0 or not is_prime(p) or n * p ** (n + 1) > 10 ** 7:
        continue
    t0 = time.perf_counter()
    r = verify_centralizer_case(grp, p, name)
    gens = all(r.details["generators"][x]["image"] == r.details["generators"][x]["cyclic"] for x in "xy")
    print(f"{name:14} {p:>2} {r.details['order']:>12} {str(gens):>5} {str(r.passed):>5} {time.perf_counter() - t0:6.2f}")
