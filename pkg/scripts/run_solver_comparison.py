#!/usr/bin/env python3
"""Compare all solvers on the same worlds and print hit-ratio / delay tables.

Example:
    python3 scripts/run_solver_comparison.py --preset desk --seeds 0 1 2 \
        --horizon 80 --out results/comparison
"""
from __future__ import annotations

import argparse

from sdcache.harness import (
    PRESETS,
    SOLVERS,
    ExperimentSpec,
    run_experiment,
)
from sdcache.lyapunov import LyapunovConfig


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    parser.add_argument("--horizon", type=int, default=80)
    parser.add_argument("--congestion", default="moderate")
    parser.add_argument("--v-weight", type=float, default=4e-3)
    parser.add_argument("--budget", type=float, default=35.0)
    parser.add_argument("--solvers", nargs="+", choices=SOLVERS,
                        default=list(SOLVERS))
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    header = f"{'solver':<8} {'hit_ratio':>10} {'value':>10} {'energy':>10} " \
             f"{'delay_viol':>10} {'infeasible':>10}"
    print(header)
    print("-" * len(header))
    for solver in args.solvers:
        spec = ExperimentSpec(
            name=f"cmp_{solver}",
            scenario=PRESETS[args.preset](
                seed=args.seeds[0], congestion=args.congestion,
                horizon_slots=args.horizon,
            ),
            lyapunov=LyapunovConfig(v_weight=args.v_weight,
                                    energy_budget_j=args.budget),
            solver=solver,
            seeds=tuple(args.seeds),
        )
        summary = run_experiment(spec, out_dir=args.out)
        agg = summary["aggregate"]
        dv = sum(r["delay_violation_slots"] for r in summary["per_seed"].values())
        infeasible = sum(r["infeasible_slots"] for r in summary["per_seed"].values())
        print(f"{solver:<8} {agg['mean_hit_ratio']['mean']:>10.4f} "
              f"{agg['mean_value']['mean']:>10.5f} "
              f"{agg['mean_energy']['mean']:>10.5f} "
              f"{dv:>10d} {infeasible:>10d}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
