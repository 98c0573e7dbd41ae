"""Command-line entry point: generate worlds, run experiments, sweep, verify."""
from __future__ import annotations

import argparse
import sys

from .harness import PRESETS, SOLVERS, ExperimentSpec, run_experiment, sweep
from .lyapunov import LyapunovConfig
from .scenario import CONGESTION_LEVELS, generate_scenario
from .types import DomainError


def _add_scenario_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", choices=sorted(PRESETS), default="paper",
                        help="world size preset")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--congestion", choices=sorted(CONGESTION_LEVELS),
                        default="moderate")
    parser.add_argument("--horizon", type=int, default=None,
                        help="override the number of slots")


def _add_run_args(parser: argparse.ArgumentParser) -> None:
    _add_scenario_args(parser)
    parser.add_argument("--solver", choices=SOLVERS, default="bqpso")
    parser.add_argument("--seeds", type=int, nargs="+", default=None,
                        help="seed list for multi-seed runs (defaults to --seed)")
    parser.add_argument("--v-weight", type=float, default=4e-3)
    parser.add_argument("--budget", type=float, default=35.0,
                        help="per-slot energy budget in joules")
    parser.add_argument("--particles", type=int, default=100)
    parser.add_argument("--iterations", type=int, default=100)
    parser.add_argument("--time-limit", type=float, default=60.0,
                        help="exact solver time limit per slot, seconds")
    parser.add_argument("--name", default="run")
    parser.add_argument("--out", default=None, help="output directory")


def _build_spec(args: argparse.Namespace) -> ExperimentSpec:
    overrides = {}
    if args.horizon is not None:
        overrides["horizon_slots"] = args.horizon
    scenario_cfg = PRESETS[args.preset](
        seed=args.seed, congestion=args.congestion, **overrides
    )
    solver_options: dict = {}
    if args.solver == "bqpso":
        solver_options = {
            "particles": args.particles,
            "max_iterations": args.iterations,
        }
    elif args.solver == "exact":
        solver_options = {"time_limit_s": args.time_limit}
    return ExperimentSpec(
        name=args.name,
        scenario=scenario_cfg,
        lyapunov=LyapunovConfig(v_weight=args.v_weight, energy_budget_j=args.budget),
        solver=args.solver,
        solver_options=solver_options,
        seeds=tuple(args.seeds) if args.seeds else (args.seed,),
    )


def _cmd_generate(args: argparse.Namespace) -> int:
    overrides = {}
    if args.horizon is not None:
        overrides["horizon_slots"] = args.horizon
    cfg = PRESETS[args.preset](seed=args.seed, congestion=args.congestion, **overrides)
    scenario = generate_scenario(cfg)
    scenario.to_snapshot(args.out)
    print(f"wrote snapshot {args.out} (fingerprint {scenario.fingerprint()[:16]})")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    spec = _build_spec(args)
    summary = run_experiment(spec, out_dir=args.out)
    agg = summary["aggregate"]
    for key in ("mean_value", "mean_energy", "mean_hit_ratio", "mean_max_delay",
                "final_backlog_per_slot"):
        stats = agg.get(key, {})
        print(f"{key}: mean={stats.get('mean', float('nan')):.6g} "
              f"std={stats.get('std', float('nan')):.3g}")
    if args.out:
        print(f"artifacts in {args.out}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = _build_spec(args)
    values: list = []
    for raw in args.values:
        try:
            values.append(float(raw))
        except ValueError:
            values.append(raw)
    results = sweep(spec, args.param, values, out_dir=args.out)
    for res in results:
        agg = res["aggregate"]
        print(
            f"{args.param}={res['sweep_value']}: "
            f"mean_value={agg['mean_value']['mean']:.6g} "
            f"mean_backlog={agg['mean_backlog']['mean']:.6g} "
            f"mean_hit_ratio={agg['mean_hit_ratio']['mean']:.4g}"
        )
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    from .verify import run_all

    results = run_all(seed=args.seed)
    failed = 0
    for name, ok, detail in results:
        print(f"[{'ok' if ok else 'FAIL'}] {name}: {detail}")
        failed += 0 if ok else 1
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdcache",
        description="Joint sensing-data caching and request allocation simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="materialize a world snapshot")
    _add_scenario_args(p_gen)
    p_gen.add_argument("--out", required=True, help="snapshot path (.json or .json.gz)")
    p_gen.set_defaults(func=_cmd_generate)

    p_run = sub.add_parser("run", help="run the online loop with one solver")
    _add_run_args(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="re-run across a parameter grid")
    _add_run_args(p_sweep)
    p_sweep.add_argument("--param", required=True,
                         help="v_weight, energy_budget_j or congestion")
    p_sweep.add_argument("--values", nargs="+", required=True)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the invariant suite")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(func=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
