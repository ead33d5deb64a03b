"""Batch experiment harness.

Every trial draws from ``RandomSource(seed, trial)``, so one ``--seed`` flag
reproduces any row. Exit codes: 0 ok, 1 a trial failed or a check was
violated, 2 bad arguments.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from statistics import median

import numpy as np

from . import __version__
from .builder import MODES, PRACTICAL, DegenerateResult, InfeasibleParams, run_builder
from .kernel import PhaseParams, phase_pipeline
from .models import (
    RandomSource,
    SamplingError,
    sample_g_prime_diag,
    sample_g_simple,
    sample_g_star,
    sample_gnm,
    sample_gnp,
    sample_hamilton_plus_matching,
    SampleDiagnostics,
)
from .oracle import edge_upper_bound, verify

COLUMNS = [
    "command", "seed", "trial", "n", "param", "epsilon", "mode", "status", "order",
    "order_over_sqrt_n", "upper_bound", "l1_excess", "kernel_order", "verify", "elapsed_ms",
]
TIMING_COLUMNS = ("elapsed_ms",)
SEED_ENV = "MINORFORGE_SEED"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def resolve_seed(cli_seed: int) -> int:
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return cli_seed
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(round(x, 10))
    return str(x)


def write_csv(rows: list[dict], out) -> None:
    writer = csv.DictWriter(out, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: _fmt(row.get(c)) for c in COLUMNS})


def _run_parallel(fn, jobs: list, parallel: int) -> list:
    if parallel <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * parallel))))


# -- sample -------------------------------------------------------------------


def cmd_sample(args) -> int:
    seed = resolve_seed(args.seed)
    src = RandomSource(seed, 0)
    diag = SampleDiagnostics()
    model = args.model
    try:
        if model in ("gstar", "gprime", "gsimple"):
            if args.r is None:
                raise UsageError(f"{model} needs --r")
            if (args.r * args.n) % 2:
                raise UsageError(f"rn must be even (r={args.r}, n={args.n})")
            if model == "gstar":
                g = sample_g_star(args.n, args.r, src)
            elif model == "gprime":
                g, diag = sample_g_prime_diag(args.n, args.r, src)
            else:
                g, diag = sample_g_simple(args.n, args.r, src)
        elif model == "hm":
            inst = sample_hamilton_plus_matching(args.n, src)
            g, diag = inst.host_graph(), inst.diagnostics()
        elif model == "gnm":
            if args.m is None:
                raise UsageError("gnm needs --m")
            g = sample_gnm(args.n, args.m, src)
        else:
            if args.p is None:
                raise UsageError("gnp needs --p")
            g = sample_gnp(args.n, args.p, src)
    except ValueError as exc:
        raise UsageError(str(exc))
    except SamplingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = g.to_text()
    info = (
        f"model={model} n={g.vertex_count} m={g.edge_count} seed={seed} rejections={diag.rejections}"
        f" x1={_fmt(diag.p1p2_edge_count)} in_xrange_window={_fmt(diag.in_xrange_window)}"
    )
    if args.out:
        Path(args.out).write_text(text)
        print(info)
    else:
        sys.stdout.write(text)
        print(info, file=sys.stderr)
    return EXIT_OK


# -- minor --------------------------------------------------------------------


def minor_trial(job: tuple) -> tuple[dict, dict | None]:
    seed, trial, n, epsilon, mode, ell_base = job
    t0 = time.perf_counter()
    row = {"command": "minor", "seed": seed, "trial": trial, "n": n, "param": 3, "epsilon": epsilon, "mode": mode}
    row["upper_bound"] = edge_upper_bound(3 * n // 2)
    cert_dict = None
    try:
        instance, res = run_builder(n, epsilon, mode, RandomSource(seed, trial), ell_base=ell_base)
    except InfeasibleParams as exc:
        row.update(status="infeasible", verify=None)
        cert_dict = {"error": str(exc)}
    except DegenerateResult as exc:
        row.update(status="degenerate", verify=None)
        cert_dict = {"error": str(exc), "stage_log": exc.state.log if exc.state else []}
    else:
        cert = res.certificate
        cert.seed = seed
        ok = bool(verify(cert, instance.host_graph())) and cert.order <= 2 * math.sqrt(3 * n)
        row.update(
            status="ok" if ok else "verify_failed",
            order=cert.order,
            order_over_sqrt_n=cert.order / math.sqrt(n),
            verify=ok,
        )
        cert_dict = cert.to_dict()
        cert_dict.update(trial=trial, software_version=__version__, diagnostics=res.diagnostics)
    row["elapsed_ms"] = int(round(1000 * (time.perf_counter() - t0)))
    return row, cert_dict


def cmd_minor(args) -> int:
    seed = resolve_seed(args.seed)
    if args.n < 4 or args.n % 2:
        raise UsageError("--n must be even and >= 4")
    if not 0 < args.epsilon < 1:
        raise UsageError("--epsilon must lie in (0, 1)")
    jobs = [(seed, t, args.n, args.epsilon, args.mode, args.ell_base) for t in range(args.trials)]
    results = sorted(_run_parallel(minor_trial, jobs, args.parallel), key=lambda rc: rc[0]["trial"])
    rows = [r for r, _ in results]
    if args.dump_certs:
        outdir = Path(args.dump_certs)
        outdir.mkdir(parents=True, exist_ok=True)
        for row, cert in results:
            name = f"cert_n{args.n}_s{seed}_t{row['trial']}.json"
            (outdir / name).write_text(json.dumps(cert, default=_json_default, sort_keys=True))
    _emit(rows, args.out)
    return EXIT_OK if all(r["status"] == "ok" for r in rows) else EXIT_FAIL


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(type(o))


def _emit(rows, out_path) -> None:
    if out_path and out_path != "-":
        with open(out_path, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)


# -- phase --------------------------------------------------------------------


def phase_trial(job: tuple) -> dict:
    seed, trial, n, lam, model = job
    t0 = time.perf_counter()
    params = PhaseParams(n, lam, model)
    rep = phase_pipeline(params, RandomSource(seed, trial))
    status = "ok"
    if not rep.verified:
        status = "verify_failed"
    elif rep.in_window and rep.ccl_upper > params.corollary_ceiling():
        status = "bound_violation"
    return {
        "command": "phase", "seed": seed, "trial": trial, "n": n, "param": lam, "mode": model,
        "status": status, "order": rep.ccl_lower, "order_over_sqrt_n": rep.ccl_lower / math.sqrt(n),
        "upper_bound": rep.ccl_upper, "l1_excess": rep.L1_excess, "kernel_order": rep.kernel_order,
        "verify": rep.verified, "elapsed_ms": int(round(1000 * (time.perf_counter() - t0))),
    }


def phase_summary(rows: list[dict], n: int, model: str) -> str:
    lines = [f"# summary (medians per lambda); ceiling rule: ccl_upper <= 4*lambda_p^1.5 + 3, "
             f"lambda_p = {'2*lambda' if model == 'gnm' else 'lambda'}"]
    lines.append("lambda,trials,l1_excess,kernel_order,ccl_lower,ccl_upper,ceiling")
    for lam in sorted({r["param"] for r in rows}):
        sub = [r for r in rows if r["param"] == lam]
        ceiling = PhaseParams(n, lam, model).corollary_ceiling()
        vals = [median(r[c] for r in sub) for c in ("l1_excess", "kernel_order", "order", "upper_bound")]
        lines.append(",".join([_fmt(lam), str(len(sub))] + [_fmt(float(v)) for v in vals] + [_fmt(ceiling)]))
    return "\n".join(lines) + "\n"


def cmd_phase(args) -> int:
    seed = resolve_seed(args.seed)
    try:
        lams = [float(x) for x in args.lam.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--lambda expects comma-separated numbers, got {args.lam!r}")
    if not lams:
        raise UsageError("--lambda needs at least one value")
    # trial index runs across the whole sweep so every row has its own stream
    jobs = [(seed, j * args.trials + t, args.n, lam, args.model) for j, lam in enumerate(lams) for t in range(args.trials)]
    rows = sorted(_run_parallel(phase_trial, jobs, args.parallel), key=lambda r: r["trial"])
    _emit(rows, args.out)
    summary = phase_summary(rows, args.n, args.model)
    if args.summary:
        Path(args.summary).write_text(summary)
    else:
        sys.stderr.write(summary)
    return EXIT_OK if all(r["status"] == "ok" for r in rows) else EXIT_FAIL


# -- oracle -------------------------------------------------------------------


def cmd_oracle(args) -> int:
    from .oracle_check import run_oracle_checks

    seed = resolve_seed(args.seed)
    if not 1 <= args.max_n <= 9:
        raise UsageError("--max-n must lie in 1..9")
    report = run_oracle_checks(args.max_n, args.samples, seed)
    print(report.summary())
    if report.violations:
        for v in report.violations[:20]:
            print("VIOLATION", v, file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="minorforge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="sample a random graph")
    s.add_argument("model", choices=["gstar", "gprime", "gsimple", "hm", "gnm", "gnp"])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--r", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    m = sub.add_parser("minor", help="build complete-minor certificates on H(n)+G(n,1)")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--epsilon", type=float, default=0.3)
    m.add_argument("--mode", choices=MODES, default=PRACTICAL)
    m.add_argument("--trials", type=int, default=1)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--parallel", type=int, default=1)
    m.add_argument("--out")
    m.add_argument("--dump-certs", dest="dump_certs")
    m.add_argument("--ell-base", dest="ell_base", type=int, help="effective length of stage-1 paths")
    m.set_defaults(func=cmd_minor)

    ph = sub.add_parser("phase", help="critical-window sweep")
    ph.add_argument("--n", type=int, required=True)
    ph.add_argument("--lambda", dest="lam", required=True, help="comma-separated window parameters")
    ph.add_argument("--model", choices=["gnm", "gnp"], default="gnm")
    ph.add_argument("--trials", type=int, default=1)
    ph.add_argument("--seed", type=int, default=0)
    ph.add_argument("--parallel", type=int, default=1)
    ph.add_argument("--out")
    ph.add_argument("--summary", help="write the summary block here instead of stderr")
    ph.set_defaults(func=cmd_phase)

    o = sub.add_parser("oracle", help="cross-check the small-graph oracles")
    o.add_argument("--max-n", dest="max_n", type=int, default=8)
    o.add_argument("--samples", type=int, default=500)
    o.add_argument("--seed", type=int, default=0)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
