"""Command line entry point ``gbp``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import adversary, bounds, harness
from .algorithms import AlgorithmKind, pack, write_decision_log
from .core import CostParams, GBPError, read_instance, write_packing
from .offline import aptas, exact_opt


def _params(ns) -> CostParams:
    return CostParams(ns.beta, ns.green)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--green", type=float, required=True)


def cmd_pack(ns) -> int:
    params = _params(ns)
    kind = AlgorithmKind.parse(ns.alg, ns.k)
    if ns.tau is not None:
        tau = ns.tau
    else:
        rule = {"full": "full", "theory": "theory", "empirical": "empirical"}[ns.tau_rule]
        tau = harness.TauRule(rule).resolve(kind, params)
    inst = read_instance(ns.input)
    res = pack(kind, tau, inst, params, log=bool(ns.log))
    if ns.out:
        write_packing(res.packing, ns.out)
    if ns.log:
        write_decision_log(res.log, ns.log)
    print(json.dumps({"algorithm": kind.label, "tau": tau, "bins": res.packing.num_bins,
                      "cost": res.packing.cost()}))
    return 0


def cmd_bounds(ns) -> int:
    rep = bounds.report(ns.alg, ns.beta, ns.green, ns.tau)
    print(json.dumps(asdict(rep), indent=1))
    return 0


def cmd_sweep(ns) -> int:
    betas = np.linspace(ns.beta_min, ns.beta_max, ns.num).tolist()
    greens = np.linspace(ns.green_min, ns.green_max, ns.num).tolist()
    rows = harness.sweep_bounds(betas, greens)
    Path(ns.out).write_text(harness.sweep_csv(rows))
    if ns.svg:
        Path(ns.svg).write_text(harness.sweep_svg(rows, ns.svg_alg))
    return 0


def cmd_adversary(ns) -> int:
    params = _params(ns)
    kw = {}
    if ns.weights:
        kw["weights"] = [int(w) for w in ns.weights.split(",")]
    if ns.k:
        kw["k"] = ns.k
    adv = adversary.generate(ns.family, ns.n, params, ns.tau, ns.eps, **kw)
    side = adversary.write_adversary(adv, ns.out)
    print(json.dumps({"items": len(adv.instance), "known_opt_cost": adv.known_opt_cost,
                      "target_ratio": adv.target_ratio, "sidecar": str(side)}))
    return 0


def cmd_exact(ns) -> int:
    res = exact_opt(read_instance(ns.input), _params(ns), cap=ns.cap)
    if ns.out:
        write_packing(res.packing, ns.out)
    print(json.dumps({"cost": res.cost, "bins": res.packing.num_bins,
                      "nodes_explored": res.nodes_explored, "proven_optimal": res.proven_optimal}))
    return 0


def cmd_aptas(ns) -> int:
    res = aptas(read_instance(ns.input), _params(ns), ns.eps, ns.groups)
    if ns.out:
        write_packing(res.packing, ns.out)
    print(json.dumps({"cost": res.cost, "bins": res.packing.num_bins, "groups": res.groups,
                      "delta": res.config.delta, "bin_types": res.bin_types}))
    return 0


def cmd_experiment(ns) -> int:
    config = harness.ExperimentConfig.load(ns.config)
    records = harness.run_experiment(config, workers=ns.workers)
    harness.emit_csv(records, ns.out)
    if ns.svg:
        Path(ns.svg).write_text(harness.experiment_svg(records))
    errors = sum(r.error is not None for r in records)
    print(json.dumps({"records": len(records), "errors": errors, "seed": config.seed}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gbp", description="Green bin packing toolkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pack", help="pack an instance with an online algorithm")
    p.add_argument("--alg", required=True, help="nextfit|worstfit|firstfit|bestfit|harmonic")
    p.add_argument("--k", type=int, default=None, help="Harmonic class count (default 10)")
    _common(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--tau", type=float)
    g.add_argument("--tau-rule", choices=["full", "theory", "empirical"], default="full")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.add_argument("--log", help="write the decision log CSV here")
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("bounds", help="print the bound report for one algorithm")
    p.add_argument("--alg", required=True, help="nextfit|worstfit|almostanyfit|harmonic|general")
    _common(p)
    p.add_argument("--tau", type=float)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep-bounds", help="tabulate bounds over a (beta, G) grid")
    p.add_argument("--out", required=True)
    p.add_argument("--num", type=int, default=40)
    p.add_argument("--beta-min", type=float, default=0.0)
    p.add_argument("--beta-max", type=float, default=20.0)
    p.add_argument("--green-min", type=float, default=0.0)
    p.add_argument("--green-max", type=float, default=1.0)
    p.add_argument("--svg")
    p.add_argument("--svg-alg", default="almostanyfit")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("adversary", help="write a worst-case family instance and sidecar")
    p.add_argument("--family", required=True, choices=adversary.FAMILIES)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float)
    _common(p)
    p.add_argument("--tau", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--weights", help="comma-separated integers (partition family)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("exact", help="optimal packing of a small instance")
    p.add_argument("--input", required=True)
    _common(p)
    p.add_argument("--cap", type=int, default=14)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("aptas", help="asymptotic approximation scheme")
    p.add_argument("--input", required=True)
    _common(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--groups", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_aptas)

    p = sub.add_parser("experiment", help="run an experiment config to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return ns.func(ns)
    except (GBPError, OSError) as exc:
        print(f"gbp: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
