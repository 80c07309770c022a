"""Command line experiment runner.

Every module is exposed as a subcommand that writes a machine-readable JSON
report (and optional CSV).  Exit codes: 0 all assertions passed, 1 a check
was falsified or failed, 2 inconclusive (a not-falsified result under
--require-certified), >= 64 usage errors.  Reports are byte-identical across
reruns of the same manifest; wall-clock timestamps live in a separate
metadata block that comparison tooling is expected to drop.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .approx import (
    CapSpec,
    cap_alpha_estimate,
    cap_alpha_quadrature,
    cap_average_matrix,
    conspiracy_net,
    doubling_sweep_random_net,
    hoeffding_tail_check,
    matrix_hoeffding_check,
    net_polytope_D,
    product_net_polytope_Sep,
    random_net_D,
    test_product_chain,
)
from .bodies import asphericity_hsball, bullet_scale, membership_polytope
from .dims import (
    dimV_upper,
    dvoretzky_section,
    flm_report,
    flm_rows_csv,
    m_mstar_check,
)
from .nets import build_net, hopf_net, save_net, verify_cover
from .rng import stream
from .witness import (
    builtin_map,
    bullet_identity_check,
    detects,
    family_coverage,
    gurvits_barnum_check,
    robustly_entangled,
    sample_robustly_entangled_2x2,
    trace_bound_check,
    unitalize,
    vidal_tarrach_check,
    werner_threshold_bisection,
)
from .hermitian import maximally_mixed, projector, random_density

SCHEMA_VERSION = 1

PASS = "pass"
FAIL = "fail"
NOT_FALSIFIED = "not-falsified"


def _write_report(args, outcome: dict, status: str) -> None:
    manifest = {
        "command": args.command,
        "parameters": {
            k: v for k, v in sorted(vars(args).items())
            if k not in ("command", "func", "out", "format") and v is not None
        },
        "toolVersion": __version__,
    }
    report = {
        "schemaVersion": SCHEMA_VERSION,
        "manifest": manifest,
        "outcome": outcome,
        "status": status,
    }
    body = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    meta = json.dumps(
        {"startedAt": datetime.datetime.now(datetime.timezone.utc).isoformat()})
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(body + "\n")
        with open(args.out + ".meta", "w") as fh:
            fh.write(meta + "\n")
    else:
        print(body)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, bool):
        return obj
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _exit_code(status: str, require_certified: bool) -> int:
    if status == PASS:
        return 0
    if status == NOT_FALSIFIED:
        return 2 if require_certified else 0
    return 1


# ---------------------------------------------------------------------------
# subcommand handlers: each returns (outcome dict, status string)


def _cmd_net(args):
    if args.method == "hopf":
        net = hopf_net(args.eps)
    else:
        net = build_net(args.n, args.eps, stream(args.seed, "net"))
    cover = verify_cover(net, args.cover_samples, args.eps, stream(args.seed, "cover"))
    if args.save:
        save_net(net, args.save)
    ok = cover >= 1.0 if args.method == "hopf" else cover >= 0.98
    return {"card": net.card, "method": net.method, "eps": net.eps,
            "realDim": net.real_dim, "coveredFraction": cover}, PASS if ok else FAIL


def _cmd_approx_d(args):
    poly, cert = net_polytope_D(args.m, args.delta, rng=stream(args.seed, "approx-d"),
                                directions=args.directions, restarts=args.restarts)
    st = cert.test_outcome.status
    status = PASS if st == "certified" else (NOT_FALSIFIED if st == "not-falsified" else FAIL)
    return {"certificate": cert.to_json(), "vertices": poly.n_vertices}, status


def _cmd_approx_sep(args):
    poly, cert = product_net_polytope_Sep(args.d, args.eps,
                                          rng=stream(args.seed, "approx-sep"))
    chain = test_product_chain(poly, cert.guaranteed_factor, args.directions,
                               rng=stream(args.seed, "chain"), tol=args.tol)
    status = NOT_FALSIFIED if chain["ok"] else FAIL
    return {"certificate": cert.to_json(), "chain": chain}, status


def _cmd_random_net(args):
    if args.sweep:
        res = doubling_sweep_random_net(args.d, args.eps, rng_seed=args.seed,
                                        n_max=args.n_max, test_states=args.test_states)
        return res, (NOT_FALSIFIED if res["found"] else FAIL)
    poly, cert = random_net_D(args.d, args.N, rng=stream(args.seed, "random-net"),
                              target_eps=args.eps, test_states=args.test_states)
    st = cert.test_outcome.status
    status = NOT_FALSIFIED if st == "not-falsified" else FAIL
    out = {"certificate": cert.to_json()}
    if args.conspiracy:
        cpoly = conspiracy_net(args.N, rng=stream(args.seed, "conspiracy"))
        res = membership_polytope(maximally_mixed(2), cpoly, tol=1e-9)
        out["conspiracy"] = {"rhoStarInside": bool(res.inside),
                             "separated": res.separating_direction is not None}
    return out, status


def _cmd_cap_stats(args):
    psi = np.zeros(args.d, dtype=complex)
    psi[0] = 1.0
    cap = CapSpec(psi, args.theta)
    est = cap_alpha_estimate(cap, args.samples, stream(args.seed, "cap-alpha"))
    quad = cap_alpha_quadrature(args.d, args.theta)
    mean, se = cap_average_matrix(cap, args.samples, stream(args.seed, "cap-avg"))
    model = bullet_scale(1 - est.alpha_hat, projector(psi))
    entry_ok = bool((np.abs(mean - model) <= 3 * se + 1e-12).all())
    ok = est.ok and abs(est.alpha_hat - quad) <= 4 * est.std_err and entry_ok
    return {"alphaHat": est.alpha_hat, "alphaQuadrature": quad, "stdErr": est.std_err,
            "bound": est.bound, "matrixFormOk": entry_ok}, PASS if ok else FAIL


def _cmd_hoeffding(args):
    if args.kind == "scalar":
        chk = hoeffding_tail_check(args.N, args.p, args.trials,
                                   stream(args.seed, "hoeffding"))
    else:
        chk = matrix_hoeffding_check(args.d, args.theta, args.M, args.t, args.trials,
                                     stream(args.seed, "matrix-hoeffding"))
    return {"empirical": chk.empirical, "bound": chk.bound, "stdErr": chk.std_err,
            "detail": chk.detail}, PASS if chk.ok else FAIL


def _cmd_dims(args):
    est = dimV_upper(args.body, args.size, args.A, stream(args.seed, "dims"))
    ok = est.lower_nats is None or est.lower_nats <= est.upper_nats + 1e-12
    return est.to_json(), PASS if ok else FAIL


def _cmd_flm(args):
    bodies = [{"body": "ball", "size": n} for n in range(args.n_min, args.n_max + 1)]
    bodies += [{"body": "D", "size": 2}, {"body": "D", "size": 3},
               {"body": "Sep", "size": 2}]
    rows = flm_report(bodies, A=args.A, B=args.B, rng=stream(args.seed, "flm"))
    if args.csv:
        flm_rows_csv(rows, args.csv)
    ratios = [r["ratio"] for r in rows if r["ratio"] is not None]
    ok = all(r >= args.ratio_floor for r in ratios)
    return {"rows": rows, "ratioFloor": args.ratio_floor,
            "minRatio": min(ratios) if ratios else None}, PASS if ok else FAIL


def _run_trial(gauge, n, k, samples, seed, i):
    exp = dvoretzky_section(gauge, n, k, 1, samples, rng=stream(seed, "dvoretzky", i))
    return exp.trials[0], exp.mean_gauge_M, exp.inradius


def _cmd_dvoretzky(args):
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        futs = [pool.submit(_run_trial, args.gauge, args.n, args.k, args.samples,
                            args.seed, i) for i in range(args.trials)]
        results = [f.result() for f in futs]
    trials = [r[0] for r in results]
    ratios = np.array([t["ratio"] for t in trials])
    ok = bool((ratios >= 1 - 1e-12).all())
    out = {"gauge": args.gauge, "n": args.n, "k": args.k,
           "medianRatio": float(np.median(ratios)),
           "maxRatio": float(ratios.max()), "trials": trials,
           "meanGaugeM": results[0][1], "inradius": results[0][2]}
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "maxGauge", "minGauge", "ratio", "seed"])
            for i, t in enumerate(trials):
                w.writerow([i, t["maxGauge"], t["minGauge"], t["ratio"], args.seed])
    return out, PASS if ok else FAIL


def _cmd_witness(args):
    seed = args.seed
    if args.check == "werner":
        thr = werner_threshold_bisection()
        ok = abs(thr - 1 / 3) <= 1e-9
        return {"threshold": thr, "expected": 1 / 3}, PASS if ok else FAIL
    if args.check == "vidal-tarrach":
        res = vidal_tarrach_check(args.d, args.samples, stream(seed, "vt"))
        return res, PASS if res["ok"] else FAIL
    if args.check == "gurvits-barnum":
        res = gurvits_barnum_check(args.d, args.samples, stream(seed, "gb"))
        return res, PASS if res["ok"] else FAIL
    if args.check == "coverage":
        fam = [builtin_map(nm, d=args.d) for nm in args.family]
        rng = stream(seed, "coverage")
        res = family_coverage(fam, lambda r: sample_robustly_entangled_2x2(r),
                              args.samples, rng)
        res.pop("reports")
        return res, PASS
    if args.check == "trace-bound":
        phi = builtin_map(args.map, d=args.d, seed=seed)
        if not phi.unital:
            phi = unitalize(phi)
        res = trace_bound_check(phi, args.samples, stream(seed, "trace-bound"))
        return res, PASS if res["ok"] else FAIL
    if args.check == "bullet-identity":
        rng = stream(seed, "bullet")
        worst_ok = all(
            bullet_identity_check(random_density(args.d * args.d, rng) * rng.uniform(0.5, 3.0))
            for _ in range(args.samples)
        )
        return {"samples": args.samples, "ok": worst_ok}, PASS if worst_ok else FAIL
    if args.check == "robust":
        phi_plus = np.zeros(4, dtype=complex)
        phi_plus[0] = phi_plus[3] = 1 / math.sqrt(2)
        v = robustly_entangled(projector(phi_plus))
        return {"state": "maximally-entangled", "robustlyEntangled": v.value,
                "verified": v.verified}, PASS if v.value else FAIL
    raise ValueError(f"unknown check {args.check!r}")


def _cmd_balls(args):
    size = args.m if args.body == "D" else args.d
    res = asphericity_hsball(args.body, size, rng=stream(args.seed, "balls"))
    ok = True
    if args.body == "D":
        ok = res.checks.get("inradius_err", 0.0) <= 1e-6 and \
            res.checks.get("outradius_err", 0.0) <= 1e-9
    return {"inradius": res.inradius, "outradius": res.outradius,
            "ratio": res.ratio, "checks": res.checks}, PASS if ok else FAIL


def _cmd_mmstar(args):
    res = m_mstar_check(args.n, args.samples, stream(args.seed, "mmstar"))
    return res, PASS if res["ok"] else FAIL


def _cmd_report(args):
    rows = []
    worst = PASS
    if os.path.isdir(args.dir):
        for name in sorted(os.listdir(args.dir)):
            if not name.endswith(".json") or name.endswith(".meta"):
                continue
            try:
                with open(os.path.join(args.dir, name)) as fh:
                    rep = json.load(fh)
            except (json.JSONDecodeError, OSError):
                continue
            if "manifest" not in rep:
                continue
            status = rep.get("status", "unknown")
            rows.append({"file": name, "command": rep["manifest"].get("command"),
                         "status": status})
            if status == FAIL:
                worst = FAIL
            elif status == NOT_FALSIFIED and worst == PASS:
                worst = NOT_FALSIFIED
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["file", "command", "status"])
            w.writeheader()
            w.writerows(rows)
    for r in rows:
        print(f"{r['status']:>14}  {r['command']:<12} {r['file']}")
    return {"reports": rows, "rollup": worst}, worst if rows else PASS


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qgeom",
                                description="convex-geometry experiments on quantum state space")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed_required=True):
        sp.add_argument("--seed", type=int, required=seed_required, default=None if seed_required else 0)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--out", type=str, default=None, help="JSON report path")
        sp.add_argument("--format", choices=["json", "csv", "both"], default="json")
        sp.add_argument("--tol", type=float, default=1e-9)
        sp.add_argument("--require-certified", action="store_true")

    sp = sub.add_parser("net", help="build and verify a sphere net")
    sp.add_argument("--n", type=int, default=4, help="real dimension")
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--method", choices=["greedy", "hopf"], default="greedy")
    sp.add_argument("--cover-samples", type=int, default=2000)
    sp.add_argument("--save", type=str, default=None)
    common(sp)
    sp.set_defaults(func=_cmd_net)

    sp = sub.add_parser("approx-d", help="net polytope approximation of the state set")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--directions", type=int, default=128)
    sp.add_argument("--restarts", type=int, default=64)
    common(sp)
    sp.set_defaults(func=_cmd_approx_d)

    sp = sub.add_parser("approx-sep", help="product net approximation of the separable set")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--directions", type=int, default=200)
    common(sp)
    sp.set_defaults(func=_cmd_approx_sep)

    sp = sub.add_parser("random-net", help="random vertex polytopes and the conspiracy example")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--N", type=int, default=64)
    sp.add_argument("--eps", type=float, default=0.75)
    sp.add_argument("--test-states", type=int, default=100)
    sp.add_argument("--sweep", action="store_true", help="doubling sweep over N")
    sp.add_argument("--n-max", type=int, default=2 ** 14)
    sp.add_argument("--conspiracy", action="store_true")
    common(sp)
    sp.set_defaults(func=_cmd_random_net)

    sp = sub.add_parser("cap-stats", help="spherical cap average statistics")
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--samples", type=int, default=10 ** 5)
    common(sp)
    sp.set_defaults(func=_cmd_cap_stats)

    sp = sub.add_parser("hoeffding", help="scalar and matrix tail-bound checks")
    sp.add_argument("--kind", choices=["scalar", "matrix"], required=True)
    sp.add_argument("--N", type=int, default=2000)
    sp.add_argument("--p", type=float, default=0.05)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--theta", type=float, default=0.3)
    sp.add_argument("--M", type=int, default=500)
    sp.add_argument("--t", type=float, default=0.2)
    sp.add_argument("--trials", type=int, default=10 ** 4)
    common(sp)
    sp.set_defaults(func=_cmd_hoeffding)

    sp = sub.add_parser("dims", help="verticial dimension bounds")
    sp.add_argument("--body", choices=["D", "Sep", "ball", "cube", "simplex"], required=True)
    sp.add_argument("--size", type=int, required=True)
    sp.add_argument("--A", type=float, default=4.0)
    common(sp)
    sp.set_defaults(func=_cmd_dims)

    sp = sub.add_parser("flm", help="facial x verticial product bound report")
    sp.add_argument("--n-min", type=int, default=4)
    sp.add_argument("--n-max", type=int, default=12)
    sp.add_argument("--A", type=float, default=4.0)
    sp.add_argument("--B", type=float, default=4.0)
    sp.add_argument("--ratio-floor", type=float, default=0.125,
                    help="lower bound asserted on product/n^2 over complete rows")
    sp.add_argument("--csv", type=str, default=None)
    common(sp)
    sp.set_defaults(func=_cmd_flm)

    sp = sub.add_parser("dvoretzky", help="random section roundness experiment")
    sp.add_argument("--gauge", choices=["ball", "cube", "cross-polytope", "D"], required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--samples", type=int, default=2000)
    sp.add_argument("--csv", type=str, default=None)
    common(sp)
    sp.set_defaults(func=_cmd_dvoretzky)

    sp = sub.add_parser("mmstar", help="mean gauge product check for a polar pair")
    sp.add_argument("--n", type=int, default=16)
    sp.add_argument("--samples", type=int, default=20000)
    common(sp)
    sp.set_defaults(func=_cmd_mmstar)

    sp = sub.add_parser("witness", help="positive map detection checks")
    sp.add_argument("--check", required=True,
                    choices=["werner", "vidal-tarrach", "gurvits-barnum", "coverage",
                             "trace-bound", "bullet-identity", "robust"])
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--family", nargs="+", default=["transpose"])
    sp.add_argument("--map", type=str, default="reduction")
    common(sp)
    sp.set_defaults(func=_cmd_witness)

    sp = sub.add_parser("balls", help="inradius/outradius/asphericity report")
    sp.add_argument("--body", choices=["D", "Sep"], required=True)
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--d", type=int, default=2)
    common(sp)
    sp.set_defaults(func=_cmd_balls)

    sp = sub.add_parser("report", help="consolidate JSON reports from a directory")
    sp.add_argument("--dir", type=str, required=True)
    sp.add_argument("--csv", type=str, default=None)
    common(sp, seed_required=False)
    sp.set_defaults(func=_cmd_report)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 64 if exc.code not in (0, None) else 0
    if args.seed is None:
        args.seed = 0
    try:
        outcome, status = args.func(args)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write_report(args, outcome, status)
    return _exit_code(status, args.require_certified)


if __name__ == "__main__":
    sys.exit(main())
