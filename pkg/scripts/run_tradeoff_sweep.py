#!/usr/bin/env python3
"""Sweep the penalty weight and print the value / backlog trade-off curve.

The curve shows the classic drift-plus-penalty behaviour: sensing value
saturates as the weight grows while the virtual energy queue backlog rises.

Example:
    python3 scripts/run_tradeoff_sweep.py --preset desk --solver exact \
        --budget 0.042 --horizon 240 --seeds 0 1 2
"""
from __future__ import annotations

import argparse

from sdcache.harness import PRESETS, SOLVERS, ExperimentSpec, sweep
from sdcache.lyapunov import LyapunovConfig


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    parser.add_argument("--solver", choices=SOLVERS, default="exact")
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    parser.add_argument("--horizon", type=int, default=240)
    parser.add_argument("--congestion", default="moderate")
    parser.add_argument("--budget", type=float, default=35.0)
    parser.add_argument("--values", type=float, nargs="+",
                        default=[1e-3, 2e-3, 4e-3, 8e-3, 15e-3])
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    spec = ExperimentSpec(
        name="tradeoff",
        scenario=PRESETS[args.preset](
            seed=args.seeds[0], congestion=args.congestion,
            horizon_slots=args.horizon,
        ),
        lyapunov=LyapunovConfig(energy_budget_j=args.budget),
        solver=args.solver,
        seeds=tuple(args.seeds),
    )
    results = sweep(spec, "v_weight", args.values, out_dir=args.out)
    print(f"{'v_weight':>10} {'mean_value':>12} {'mean_energy':>12} {'mean_backlog':>13}")
    for res in results:
        agg = res["aggregate"]
        print(f"{res['sweep_value']:>10.4g} "
              f"{agg['mean_value']['mean']:>12.6f} "
              f"{agg['mean_energy']['mean']:>12.6f} "
              f"{agg['mean_backlog']['mean']:>13.6f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
