"""Command-line driver: verify suites, construct the K oracle, audit it.

Exit codes: 0 all claims pass, 1 some claim fails, 2 configuration or
artifact error, 3 time or memory budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import resource
import signal
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

from . import __version__
from .pipeline import (
    CONFIG_A,
    CONFIG_B,
    KOracle,
    ParamError,
    PipelineConfig,
    audit_invariance,
    audit_theorem,
    build_k_oracle,
    check_params,
    has_nontrivial_cyclic_normal,
)
from .schreier import TableCache, content_hash
from .suites import CLAIMS, SUITES, claims_for, run_claim

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3
SCHEMA = "autf2-report/1"
PRESETS = {"A": CONFIG_A, "B": CONFIG_B}
SUITE_CHOICES = ["symbolic", "centralizers", "commutator", "fox", "sanov", "pipeline", "audit", "all", "none"]


class BudgetExceeded(Exception):
    pass


class ConfigError(Exception):
    pass


def _alarm(signum, frame):
    raise BudgetExceeded("time budget exceeded")


def apply_budgets(mem_mb: float | None, seconds: float | None) -> None:
    if mem_mb:
        lim = int(mem_mb * 1024 * 1024)
        resource.setrlimit(resource.RLIMIT_AS, (lim, lim))
    if seconds:
        signal.signal(signal.SIGALRM, _alarm)
        signal.setitimer(signal.ITIMER_REAL, float(seconds))


def load_config(spec: str | None) -> tuple[PipelineConfig, dict]:
    """Preset name (A, B) or path to a JSON file; returns (pipeline config, raw dict)."""
    if spec is None:
        return CONFIG_A, {}
    if spec in PRESETS:
        return PRESETS[spec], {"preset": spec}
    try:
        with open(spec) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {spec}: {exc}") from None
    pc = raw.get("pipeline", "A")
    try:
        cfg = PRESETS[pc] if isinstance(pc, str) else PipelineConfig.from_json(pc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad pipeline section: {exc}") from None
    return cfg, raw


def _with_seed(cfg: PipelineConfig, seed: int | None) -> PipelineConfig:
    if seed is None:
        return cfg
    from dataclasses import replace
    return replace(cfg, seed=seed)


# ---------------------------------------------------------------------------
# records


def _record(claim_id: str, anchor: str, ok: bool, witness, millis: int | None) -> dict:
    r = {"claim_id": claim_id, "anchor": anchor, "status": "pass" if ok else "fail"}
    if witness is not None:
        r["witness"] = witness
    if millis is not None:
        r["millis"] = millis
    return r


def _timed(claim_id: str) -> tuple[bool, dict, int]:
    t0 = time.perf_counter()
    try:
        ok, w = run_claim(claim_id)
    except (ValueError, AssertionError) as exc:
        ok, w = False, {"error": f"{type(exc).__name__}: {exc}"}
    return ok, w, int((time.perf_counter() - t0) * 1000)


def run_claims(ids: Sequence[str], jobs: int = 1, timings: bool = True) -> list[dict]:
    if jobs > 1 and len(ids) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_timed, ids))
    else:
        results = [_timed(c) for c in ids]
    return [_record(c, CLAIMS[c].anchor, ok, w, ms if timings else None) for c, (ok, w, ms) in zip(ids, results)]


def pipeline_records(k: KOracle, build_ms: int | None) -> list[dict]:
    summ = k.index_summary()
    recs = [_record("pipeline.build", "explicit construction of K", True,
                    {"indices": {kk: (str(v) if isinstance(v, int) and not isinstance(v, bool) else v) for kk, v in summ.items()}},
                    build_ms)]
    for name, ok in sorted(k.checks.items()):
        if isinstance(ok, bool):
            recs.append(_record(f"pipeline.{name}", "explicit construction of K", ok, None, None))
    if k.config.nspec.route == "direct":
        recs.append(_record("pipeline.no_cyclic_normal", "quotient without cyclic normal subgroups",
                            not has_nontrivial_cyclic_normal(k.config.nspec.group()), None, None))
    return recs


def audit_records(k: KOracle, timings: bool) -> list[dict]:
    out = []
    for f, anchor in ((audit_invariance, "K invariant under the level-2 automorphisms"),
                      (audit_theorem, "congruence subgroup of K inside the target")):
        t0 = time.perf_counter()
        r = f(k)
        ms = int((time.perf_counter() - t0) * 1000) if timings else None
        out.append(_record(f"audit.{r.name}", anchor, r.passed,
                           {"counts": r.counts, "failures": r.failures, "witnesses": r.witnesses}, ms))
    return out


def write_report(records: list[dict], config_hash: str, out: str | None) -> dict:
    rep = {"tool_version": __version__, "schema": SCHEMA, "config_hash": config_hash, "records": records}
    text = json.dumps(rep, indent=2, sort_keys=True) + "\n"
    if out:
        d = os.path.dirname(os.path.abspath(out))
        os.makedirs(d, exist_ok=True)
        with open(out, "w") as fh:
            fh.write(text)
        with open(os.path.splitext(out)[0] + ".md", "w") as fh:
            fh.write(markdown_summary(rep))
    return rep


def markdown_summary(rep: dict) -> str:
    lines = [f"# Report ({rep['tool_version']})", "", f"config hash `{rep['config_hash'][:16]}`", "",
             "| claim | status | anchor |", "|---|---|---|"]
    for r in rep["records"]:
        lines.append(f"| {r['claim_id']} | {r['status']} | {r['anchor']} |")
    n_fail = sum(r["status"] != "pass" for r in rep["records"])
    lines += ["", f"{len(rep['records']) - n_fail} passed, {n_fail} failed", ""]
    return "\n".join(lines)


def _print_records(records):
    for r in records:
        ms = f" ({r['millis']} ms)" if "millis" in r else ""
        print(f"{r['status'].upper():4} {r['claim_id']}{ms}")


# ---------------------------------------------------------------------------
# artifacts


def _envelope_digest(env: dict) -> str:
    return content_hash({k: v for k, v in env.items() if k != "envelope_hash"})


def construct(cfg: PipelineConfig, cache_dir: str, out: str | None) -> tuple[KOracle | None, dict, bool]:
    cache = TableCache(cache_dir)
    art = os.path.join(cache.root, f"artifact-{cfg.digest()}.json")
    if os.path.exists(art):
        env = read_artifact(art)
        if out and os.path.abspath(out) != os.path.abspath(art):
            with open(out, "w") as fh:
                json.dump(env, fh, indent=2, sort_keys=True)
        return None, env, True
    k = build_k_oracle(cfg, cache)
    env = k.envelope()
    env["envelope_hash"] = _envelope_digest(env)
    for path in filter(None, (art, out)):
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(env, fh, indent=2, sort_keys=True)
        os.replace(tmp, path)
    return k, env, False


def read_artifact(path: str) -> dict:
    try:
        with open(path) as fh:
            env = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read artifact {path}: {exc}") from None
    if env.get("envelope_hash") != _envelope_digest(env):
        raise ConfigError(f"artifact {path} fails its content hash")
    return env


def load_oracle(env: dict, cache_dir: str) -> KOracle:
    cfg = PipelineConfig.from_json(env["config"])
    if cfg.digest() != env["config_hash"]:
        raise ConfigError("artifact config hash mismatch")
    try:
        k = build_k_oracle(cfg, TableCache(cache_dir))
    except ValueError as exc:
        raise ConfigError(f"cached tables unusable: {exc}") from None
    got = {n: t.content_hash() for n, t in k._tables().items()}
    if got != env["tables"]:
        raise ConfigError("artifact tables do not match the cache (stale artifact)")
    return k


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="autf2", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="preset A or B, or a JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--cache-dir", default=".autf2-cache")
        p.add_argument("--out", default=None, help="report / artifact path (JSON; a .md summary is written alongside)")
        p.add_argument("--budget-mem", type=float, default=None, help="address-space limit in MB")
        p.add_argument("--budget-time", type=float, default=None, help="wall-clock limit in seconds")
        p.add_argument("--timings", action=argparse.BooleanOptionalAction, default=None,
                       help="include per-claim milliseconds (default: on for verify, off for audit)")

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", default="all", choices=SUITE_CHOICES)
    v.add_argument("--cases", default="default", choices=["default"], help="case list (only the built-in one)")
    common(v)
    c = sub.add_parser("construct", help="build the K oracle and write its artifact")
    common(c)
    a = sub.add_parser("audit", help="audit a constructed K oracle")
    a.add_argument("--artifact", default=None, help="artifact from construct (default: build from --config)")
    common(a)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        apply_budgets(args.budget_mem, args.budget_time)
        return _dispatch(args)
    except BudgetExceeded as exc:
        print(f"budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except MemoryError:
        print("budget: memory budget exceeded", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, ParamError) as exc:
        print(f"config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    finally:
        if args.budget_time:
            signal.setitimer(signal.ITIMER_REAL, 0)


def _dispatch(args) -> int:
    cfg, raw = load_config(args.config)
    cfg = _with_seed(cfg, args.seed if args.seed is not None else raw.get("seed"))
    if args.command == "verify":
        timings = True if args.timings is None else args.timings
        suite = raw.get("suite", args.suite) if args.suite == "all" and "suite" in raw else args.suite
        ids = claims_for(suite) if suite not in ("pipeline", "audit") else []
        records = run_claims(ids, args.jobs, timings)
        if suite in ("pipeline", "audit", "all"):
            check_params(cfg)
            t0 = time.perf_counter()
            k = build_k_oracle(cfg, TableCache(args.cache_dir))
            ms = int((time.perf_counter() - t0) * 1000) if timings else None
            records += pipeline_records(k, ms)
            if suite in ("audit", "all"):
                records += audit_records(k, timings)
        h = content_hash({"suite": suite, "pipeline": cfg.to_json()})
        rep = write_report(records, h, args.out)
        _print_records(records)
        return EXIT_OK if all(r["status"] == "pass" for r in rep["records"]) else EXIT_FAIL
    if args.command == "construct":
        k, env, hit = construct(cfg, args.cache_dir, args.out)
        print("cache hit" if hit else "built", env["config_hash"][:16])
        for key, val in env["indices"].items():
            print(f"  {key}: {val}")
        checks_ok = all(v for v in env["checks"].values() if isinstance(v, bool))
        return EXIT_OK if checks_ok else EXIT_FAIL
    if args.command == "audit":
        timings = False if args.timings is None else args.timings
        if args.artifact:
            env = read_artifact(args.artifact)
            k = load_oracle(env, args.cache_dir)
            if args.seed is not None:
                k.config = _with_seed(k.config, args.seed)
        else:
            k = build_k_oracle(cfg, TableCache(args.cache_dir))
        records = audit_records(k, timings)
        rep = write_report(records, k.config.digest(), args.out)
        _print_records(records)
        return EXIT_OK if all(r["status"] == "pass" for r in rep["records"]) else EXIT_FAIL
    raise ConfigError(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
