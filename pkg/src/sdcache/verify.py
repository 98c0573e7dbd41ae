"""Self-consistency invariants behind the `verify` CLI subcommand.

Each check returns (name, passed, detail) so failures are diagnosable from
the command line and from tests.
"""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
from scipy import integrate

from . import models
from .bqpso import allocate_y
from .harness import desk_config, make_solver
from .lyapunov import LyapunovConfig, build_slot_instance, check_drift_bound, ocda_run
from .scenario import ScenarioConfig, generate_scenario

CheckResult = tuple[str, bool, str]


def check_queue_recurrence(seed: int = 0) -> CheckResult:
    """The realized backlog path satisfies the recurrence and the drift bound."""
    cfg = desk_config(seed=seed, horizon_slots=60)
    scenario = generate_scenario(cfg)
    lyap = LyapunovConfig(energy_budget_j=0.05)
    trace = ocda_run(scenario, make_solver("greedy"), lyap)
    try:
        results = check_drift_bound(
            trace.backlogs, trace.column("energy"), lyap.energy_budget_j
        )
    except Exception as exc:  # recurrence itself broken
        return ("queue-recurrence", False, str(exc))
    bad = sum(1 for ok in results if not ok)
    return ("queue-recurrence", bad == 0, f"{bad} drift-bound violations")


def check_allocation_invariants(seed: int = 0, trials: int = 50) -> CheckResult:
    """Derived allocations never violate coverage, linkage or demand bounds."""
    cfg = desk_config(seed=seed, horizon_slots=8)
    scenario = generate_scenario(cfg)
    rng = np.random.default_rng(seed)
    bad = 0
    for trial in range(trials):
        t = int(rng.integers(scenario.horizon))
        inst = build_slot_instance(scenario, t, 0.0, LyapunovConfig())
        x = rng.integers(0, 2, (inst.n_rsus, inst.n_sds))
        y = allocate_y(x, inst)
        report = models.validate(x, y, inst)
        if report.of("C4") or report.of("C5"):
            bad += 1
    return ("allocation-invariants", bad == 0, f"{bad}/{trials} trials violated C4/C5")


def check_coverage_symmetry(seed: int = 0) -> CheckResult:
    """Region coverage lists and the RSU coverage matrix agree both ways."""
    scenario = generate_scenario(desk_config(seed=seed, horizon_slots=1))
    cov = scenario.coverage
    topo = scenario.topology
    for region in topo.regions:
        for i in range(topo.n_rsus):
            listed = i in region.covering_rsus
            if listed != bool(cov[i, region.id]):
                return (
                    "coverage-symmetry",
                    False,
                    f"mismatch at RSU {i}, region {region.id}",
                )
            in_back_ref = region.id in topo.regions_of(i)
            if listed != in_back_ref:
                return (
                    "coverage-symmetry",
                    False,
                    f"back-reference mismatch at RSU {i}, region {region.id}",
                )
    return ("coverage-symmetry", True, "coverage maps consistent")


def check_channel_mean(seed: int = 0, n_draws: int = 100_000,
                       tolerance: float = 0.01) -> CheckResult:
    """Monte-Carlo channel mean matches quadrature over the shadowing law."""
    cfg = ScenarioConfig(seed=seed)
    distance = 200.0
    rng = np.random.default_rng(seed)
    pl_mean = cfg.pathloss_pl0_db + 10.0 * cfg.pathloss_exponent * math.log10(
        distance / cfg.pathloss_d0_m
    )
    shadowing = rng.normal(0.0, cfg.shadowing_sigma_db, size=n_draws)
    gains = 10 ** (-(pl_mean + shadowing) / 10.0)
    snr0 = cfg.rsu_tx_power_w / cfg.noise_power_w
    mc = float(np.mean(cfg.bandwidth_hz * np.log2(1.0 + snr0 * gains)))

    sigma = cfg.shadowing_sigma_db

    def integrand(s: float) -> float:
        gain = 10 ** (-(pl_mean + s) / 10.0)
        rate = cfg.bandwidth_hz * math.log2(1.0 + snr0 * gain)
        return rate * math.exp(-(s**2) / (2 * sigma**2)) / (sigma * math.sqrt(2 * math.pi))

    quad, _ = integrate.quad(integrand, -8 * sigma, 8 * sigma, limit=200)
    rel = abs(mc - quad) / quad
    return (
        "channel-mean",
        rel <= tolerance,
        f"relative error {rel:.4%} (MC {mc:.4g} vs quadrature {quad:.4g})",
    )


def check_reproducibility(seed: int = 0) -> CheckResult:
    """Same seed, same world, byte-identical trace CSVs."""
    cfg = desk_config(seed=seed, horizon_slots=30)
    s1 = generate_scenario(cfg)
    s2 = generate_scenario(replace(cfg))
    if s1.fingerprint() != s2.fingerprint():
        return ("reproducibility", False, "scenario fingerprints differ")
    lyap = LyapunovConfig()
    t1 = ocda_run(s1, make_solver("bqpso", seed=seed,
                                  options={"particles": 10, "max_iterations": 5}), lyap)
    t2 = ocda_run(s2, make_solver("bqpso", seed=seed,
                                  options={"particles": 10, "max_iterations": 5}), lyap)
    if t1.to_csv() != t2.to_csv():
        return ("reproducibility", False, "trace CSVs differ between repeats")
    return ("reproducibility", True, "fingerprints and CSVs identical")


def run_all(seed: int = 0) -> list[CheckResult]:
    return [
        check_queue_recurrence(seed),
        check_allocation_invariants(seed),
        check_coverage_symmetry(seed),
        check_channel_mean(seed),
        check_reproducibility(seed),
    ]
