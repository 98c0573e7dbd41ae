"""Experiment orchestration: named configs, multi-seed runs, CSV outputs.

A run produces one trace CSV per seed (seed-deterministic, byte-identical on
repeat), a timings sidecar, a JSON metadata file and a summary CSV with the
per-seed aggregates.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from . import baselines, bqpso, exact
from .lyapunov import LyapunovConfig, SlotSolver, ocda_run
from .metrics import MetricsTrace
from .scenario import Scenario, ScenarioConfig, generate_scenario
from .types import DomainError

SOLVERS = ("bqpso", "exact", "greedy", "random")


def desk_config(seed: int = 0, congestion: str = "moderate",
                **overrides) -> ScenarioConfig:
    """Small world on which the exact solver runs at interactive speed."""
    base = dict(
        area_w_m=400.0,
        area_h_m=250.0,
        region_rows=1,
        region_cols=2,
        n_rsus=2,
        coverage_min_regions=1,
        coverage_max_regions=2,
        sd_per_region=4,
        sd_size_bits_min=1_500_000,
        sd_size_bits_max=4_000_000,
        validity_radius_m=280.0,
        rsu_capacity_bits_min=5_000_000,
        rsu_capacity_bits_max=6_000_000,
        rsu_service_rate=6.0,
        bs_service_rate=60.0,
        demand_base_rate=0.4,
        one_way_window_slots=60,
        sd_lifespan_min_slots=1,
        sd_lifespan_max_slots=40,
        horizon_slots=240,
        congestion=congestion,
        seed=seed,
    )
    base.update(overrides)
    return ScenarioConfig(**base)


def paper_config(seed: int = 0, congestion: str = "moderate",
                 **overrides) -> ScenarioConfig:
    """Full-scale world (6 RSUs, 16 regions, 80 SDs)."""
    return ScenarioConfig(seed=seed, congestion=congestion, **overrides)


PRESETS = {"desk": desk_config, "paper": paper_config}


def make_solver(name: str, seed: int = 0, options: dict | None = None) -> SlotSolver:
    options = dict(options or {})
    if name == "bqpso":
        options.setdefault("rng_seed", seed)
        return bqpso.solver(bqpso.BqpsoConfig(**options))
    if name == "exact":
        return exact.solver(**options)
    if name == "greedy":
        return baselines.greedy_solver()
    if name == "random":
        options.setdefault("rng_seed", seed)
        return baselines.random_solver(**options)
    raise DomainError(f"unknown solver {name!r}")


@dataclass
class ExperimentSpec:
    name: str
    scenario: ScenarioConfig
    lyapunov: LyapunovConfig = field(default_factory=LyapunovConfig)
    solver: str = "bqpso"
    solver_options: dict = field(default_factory=dict)
    seeds: tuple[int, ...] = (0,)
    horizon: int | None = None


def run_single(
    spec: ExperimentSpec, seed: int, scenario: Scenario | None = None
) -> MetricsTrace:
    """One seeded run of the online loop."""
    if scenario is None:
        scenario = generate_scenario(replace(spec.scenario, seed=seed))
    solver = make_solver(spec.solver, seed=seed, options=spec.solver_options)
    return ocda_run(scenario, solver, spec.lyapunov, horizon=spec.horizon)


def run_experiment(spec: ExperimentSpec, out_dir: str | Path | None = None) -> dict:
    """Run all seeds, optionally writing artifacts; returns the summary.

    The summary maps each seed to its aggregate metrics plus a cross-seed
    mean/std block.
    """
    per_seed: dict[int, dict] = {}
    traces: dict[int, MetricsTrace] = {}
    delay_tol = float(spec.scenario.delay_tolerance_s)
    for seed in spec.seeds:
        trace = run_single(spec, seed)
        traces[seed] = trace
        per_seed[seed] = trace.aggregates(delay_tolerance=delay_tol)

    summary = {
        "name": spec.name,
        "solver": spec.solver,
        "seeds": list(spec.seeds),
        "per_seed": per_seed,
        "aggregate": aggregate(list(per_seed.values())),
    }

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for seed, trace in traces.items():
            stem = f"{spec.name}_seed{seed}"
            trace.to_csv(out / f"{stem}.csv")
            trace.timings_csv(out / f"{stem}_timings.csv")
        meta = {
            "name": spec.name,
            "solver": spec.solver,
            "solver_options": spec.solver_options,
            "scenario": asdict(spec.scenario),
            "lyapunov": asdict(spec.lyapunov),
            "seeds": list(spec.seeds),
            "horizon": spec.horizon,
        }
        (out / f"{spec.name}.meta.json").write_text(json.dumps(meta, indent=2))
        _write_summary_csv(out / f"{spec.name}_summary.csv", per_seed)
    summary["traces"] = traces
    return summary


def aggregate(rows: list[dict]) -> dict:
    """Cross-seed mean and standard deviation per metric, NaN-tolerant."""
    if not rows:
        return {}
    out = {}
    for key in rows[0]:
        vals = [r[key] for r in rows if not _is_nan(r[key])]
        if not vals:
            out[key] = {"mean": math.nan, "std": math.nan}
            continue
        mean = sum(vals) / len(vals)
        var = sum((v - mean) ** 2 for v in vals) / len(vals)
        out[key] = {"mean": mean, "std": math.sqrt(var)}
    return out


def _is_nan(v) -> bool:
    return isinstance(v, float) and math.isnan(v)


def _write_summary_csv(path: Path, per_seed: dict[int, dict]) -> None:
    seeds = sorted(per_seed)
    columns = ["seed"] + list(per_seed[seeds[0]].keys())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for seed in seeds:
        writer.writerow([seed] + [repr(per_seed[seed][c]) for c in columns[1:]])
    path.write_text(buf.getvalue())


def sweep(
    base: ExperimentSpec,
    parameter: str,
    values: list,
    out_dir: str | Path | None = None,
) -> list[dict]:
    """Re-run an experiment across a parameter grid.

    ``parameter`` is either a LyapunovConfig field (for example ``v_weight``
    or ``energy_budget_j``) or a ScenarioConfig field (``congestion``).
    """
    results = []
    for value in values:
        if hasattr(base.lyapunov, parameter):
            spec = replace(
                base,
                name=f"{base.name}_{parameter}={value}",
                lyapunov=replace(base.lyapunov, **{parameter: value}),
            )
        elif hasattr(base.scenario, parameter):
            spec = replace(
                base,
                name=f"{base.name}_{parameter}={value}",
                scenario=replace(base.scenario, **{parameter: value}),
            )
        else:
            raise DomainError(f"unknown sweep parameter {parameter!r}")
        summary = run_experiment(spec, out_dir=out_dir)
        summary["sweep_value"] = value
        results.append(summary)
    return results
