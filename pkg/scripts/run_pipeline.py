"""Build the K oracle for a preset, run both audits, print indices and timings.

usage: python3 scripts/run_pipeline.py [A|B] [--seed N]
"""
import argparse
import json
from dataclasses import replace
import resource
import time

from autf2.pipeline import CONFIG_A, CONFIG_B, audit_invariance, audit_theorem, build_k_oracle

ap = argparse.ArgumentParser()
ap.add_argument("preset", nargs="?", default="A", choices=["A", "B"])
ap.add_argument("--seed", type=int, default=0)
args = ap.parse_args()

cfg = replace({"A": CONFIG_A, "B": CONFIG_B}[args.preset], seed=args.seed)
t0 = time.perf_counter()
k = build_k_oracle(cfg, log=print)
t1 = time.perf_counter()
inv = audit_invariance(k)
thm = audit_theorem(k)
t2 = time.perf_counter()
print(json.dumps(k.index_summary(), indent=2))
print("invariance", inv.passed, inv.counts)
print("congruence", thm.passed, thm.counts)
print(f"build {t1 - t0:.2f}s, audits {t2 - t1:.2f}s, "
      f"peak rss {resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024:.0f} MB")
