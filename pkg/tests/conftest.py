"""Shared fixtures: tiny random slot instances and a cached desk scenario.

Tiny instances are constructed so the all-BS fallback (x = 0, y = 0) is
always feasible; the exact solver and the enumeration oracle therefore always
have a common optimum to agree on.
"""
from __future__ import annotations

import numpy as np
import pytest

from sdcache.harness import desk_config
from sdcache.scenario import generate_scenario
from sdcache.slot import SlotInstance


def make_tiny_instance(seed: int) -> SlotInstance:
    """Random instance with I<=2, J<=2, K<=3 and per-pair demand <=2."""
    rng = np.random.default_rng(seed)
    n_i = int(rng.integers(1, 3))
    n_j = int(rng.integers(1, 3))
    n_k = int(rng.integers(1, 4))

    coverage = np.zeros((n_i, n_j), dtype=bool)
    while not coverage.any(axis=0).all():
        coverage = rng.random((n_i, n_j)) < 0.7

    demand = rng.integers(0, 3, (n_j, n_k))
    rsu_rates = np.where(coverage, rng.uniform(1e7, 1e8, (n_i, n_j)), np.nan)
    with np.errstate(invalid="ignore"):
        bs_rates = 0.5 * np.nanmin(
            np.where(coverage, rsu_rates, np.inf), axis=0
        )
    bs_rates = np.where(np.isfinite(bs_rates), bs_rates, 1e7)

    sizes = rng.integers(100_000, 500_000, n_k).astype(float)
    storage = rng.uniform(1.5, 3.0, n_i) * sizes.mean()
    value_coef = rng.uniform(0.0, 1.0, (n_i, n_j, n_k)) * coverage[:, :, None]

    return SlotInstance(
        slot=0,
        backlog=float(rng.uniform(0.0, 2.0)),
        v_weight=float(rng.uniform(0.05, 0.5)),
        demand=demand,
        rsu_rates=rsu_rates,
        bs_rates=bs_rates,
        coverage=coverage,
        value_coef=value_coef,
        sizes=sizes,
        storage=storage,
        rsu_tx_power=np.full(n_i, 1.0),
        bs_tx_power=0.1,
        service_rates=rng.uniform(4.0, 10.0, n_i),
        bs_service_rate=float(rng.uniform(20.0, 40.0)),
        delay_tolerance=np.full(n_j, float(rng.uniform(0.5, 1.5))),
        cache_power_w_per_bit=1e-8,
        delay_slack_scale=1e4,
        stability_slack_scale=1e4,
    )


def random_decision(inst: SlotInstance, rng: np.random.Generator,
                    feasible_bias: float = 0.5):
    """A random (x, y) pair, deliberately mixing feasible and infeasible."""
    x = (rng.random((inst.n_rsus, inst.n_sds)) < 0.5).astype(np.int64)
    y = np.zeros((inst.n_rsus, inst.n_regions, inst.n_sds), dtype=np.int64)
    for i in range(inst.n_rsus):
        for j in range(inst.n_regions):
            for k in range(inst.n_sds):
                if rng.random() < feasible_bias:
                    cap = int(inst.demand[j, k]) if inst.coverage[i, j] and x[i, k] else 0
                else:
                    cap = int(inst.demand[j, k]) + 1
                if cap > 0:
                    y[i, j, k] = int(rng.integers(0, cap + 1))
    return x, y


@pytest.fixture(scope="session")
def desk_scenario():
    return generate_scenario(desk_config(seed=7, horizon_slots=60))


@pytest.fixture(scope="session")
def tiny_instances():
    return [make_tiny_instance(seed) for seed in range(30)]
