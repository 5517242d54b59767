"""Command-line front end: simulate / sweep / compare-fronthaul / verify.

Configuration comes from an optional key-value file, HCRAN_* environment
variables, and explicit flags, in increasing precedence.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import harness, verify
from .scenario import load_config
from .traffic import TrafficConfig


def _float_list(text: str):
    return [float(x) for x in text.split(",") if x.strip()]


def _load(args):
    config, traffic = load_config(args.config, use_env=True)
    if getattr(args, "slots", None) is not None:
        config = replace(config, slots=args.slots)
    if getattr(args, "v", None) is not None:
        config = replace(config, tradeoff=args.v)
    if getattr(args, "lam", None) is not None:
        traffic = TrafficConfig.for_rues(config.num_rue, args.lam)
    return config, traffic


def _cmd_simulate(args) -> int:
    config, traffic = _load(args)
    result = harness.run_trajectory(config, traffic, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    harness.emit_csv([result.summary], os.path.join(args.out, "summary.csv"))
    harness.emit_trace_csv(result, os.path.join(args.out, "trace.csv"))
    s = result.summary
    print(f"{s.run_id}: avg_queue_total={s.avg_queue_total:.6g} "
          f"avg_power_mean={s.avg_power_mean:.6g} avg_eta_ee={s.avg_eta_ee:.6g} "
          f"stability_slope={s.stability_slope:.3g} drift_pass_rate={s.drift_pass_rate:.3f}")
    return 0


def _cmd_sweep(args) -> int:
    config, _ = _load(args)
    summaries = harness.sweep(config, _float_list(args.v_list), _float_list(args.lambda_list),
                              args.seeds, slots=args.slots)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "sweep.csv")
    harness.emit_csv(summaries, path)
    print(f"wrote {len(summaries)} runs to {path}")
    return 0


def _cmd_compare_fronthaul(args) -> int:
    config, _ = _load(args)
    constrained, ideal = harness.compare_fronthaul(
        config, args.cap, _float_list(args.v_list), args.lam, args.seeds, slots=args.slots)
    os.makedirs(args.out, exist_ok=True)
    harness.emit_csv(constrained + ideal, os.path.join(args.out, "fronthaul_compare.csv"))
    print(f"wrote {len(constrained)}+{len(ideal)} paired runs to {args.out}")
    return 0


def _cmd_verify(args) -> int:
    failures = verify.run_all(verbose=True)
    print(f"{len(verify.CHECKS) - failures}/{len(verify.CHECKS)} checks passed")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hcran",
                                     description="Queue-aware energy-efficient H-CRAN simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one seeded trajectory")
    sim.add_argument("--config", default=None)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--slots", type=int, default=None)
    sim.add_argument("--v", type=float, default=None, help="tradeoff parameter override")
    sim.add_argument("--lambda", dest="lam", type=float, default=None)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=_cmd_simulate)

    sw = sub.add_parser("sweep", help="grid of (V, lambda, seed) trajectories")
    sw.add_argument("--config", default=None)
    sw.add_argument("--v-list", required=True)
    sw.add_argument("--lambda-list", required=True)
    sw.add_argument("--seeds", type=int, default=5)
    sw.add_argument("--slots", type=int, default=None)
    sw.add_argument("--out", required=True)
    sw.set_defaults(func=_cmd_sweep)

    cf = sub.add_parser("compare-fronthaul", help="constrained vs ideal fronthaul arms")
    cf.add_argument("--config", default=None)
    cf.add_argument("--cap", type=float, required=True)
    cf.add_argument("--v-list", required=True)
    cf.add_argument("--lambda", dest="lam", type=float, default=4.2)
    cf.add_argument("--seeds", type=int, default=5)
    cf.add_argument("--slots", type=int, default=None)
    cf.add_argument("--out", required=True)
    cf.set_defaults(func=_cmd_compare_fronthaul)

    ver = sub.add_parser("verify", help="run the oracle and invariant suite")
    ver.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
