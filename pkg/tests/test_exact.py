"""Linearization and branch-and-bound tests, including the knapsack reduction."""
from __future__ import annotations

import numpy as np
import pytest

from sdcache import models
from sdcache.exact import (
    LinearizedProgram,
    enumerate_oracle,
    linearize,
    solve_bb,
)
from sdcache.slot import SlotInstance
from sdcache.types import DomainError

from conftest import make_tiny_instance, random_decision


def single_rsu_instance(seed: int) -> SlotInstance:
    """One RSU, loose queues and delays: the placement is a pure knapsack."""
    rng = np.random.default_rng(seed)
    n_j = int(rng.integers(1, 3))
    n_k = int(rng.integers(2, 4))
    coverage = np.ones((1, n_j), dtype=bool)
    demand = rng.integers(0, 3, (n_j, n_k))
    rsu_rates = rng.uniform(1e7, 1e8, (1, n_j))
    sizes = rng.integers(1, 20, n_k).astype(float)
    return SlotInstance(
        slot=0,
        backlog=float(rng.uniform(0.0, 2.0)),
        v_weight=float(rng.uniform(0.05, 0.5)),
        demand=demand,
        rsu_rates=rsu_rates,
        bs_rates=0.5 * rsu_rates.min(axis=0),
        coverage=coverage,
        value_coef=rng.uniform(0.0, 1.0, (1, n_j, n_k)),
        sizes=sizes,
        storage=np.array([float(rng.integers(5, 30))]),
        rsu_tx_power=np.array([1.0]),
        bs_tx_power=0.1,
        service_rates=np.array([1e6]),
        bs_service_rate=1e6,
        delay_tolerance=np.full(n_j, 1e6),
        cache_power_w_per_bit=1e-3,
    )


def knapsack_oracle(inst: SlotInstance) -> float:
    """DP over integer sizes: best achievable objective for one RSU.

    Item profit folds the optimal allocation given placement: serve a pair
    fully when its objective coefficient is negative, skip it otherwise.
    """
    profits = []
    for k in range(inst.n_sds):
        gain = -float(inst.objective_x_coef[0, k])
        for j in range(inst.n_regions):
            gain -= inst.demand[j, k] * min(0.0, float(inst.objective_y_coef[0, j, k]))
        profits.append(gain)
    capacity = int(inst.storage[0])
    sizes = inst.sizes.astype(int)
    best = np.zeros(capacity + 1)
    for k in range(inst.n_sds):
        if profits[k] <= 0:
            continue
        for c in range(capacity, sizes[k] - 1, -1):
            best[c] = max(best[c], best[c - sizes[k]] + profits[k])
    return inst.objective_const - float(best[capacity])


class TestLinearize:
    def test_variable_table_complete(self):
        inst = make_tiny_instance(0)
        prog = linearize(inst)
        n_pairs = sum(
            1
            for i in range(inst.n_rsus)
            for j in range(inst.n_regions)
            for k in range(inst.n_sds)
            if inst.coverage[i, j] and inst.demand[j, k] > 0
        )
        assert len(prog.triples) == n_pairs
        assert "L0" in prog.index
        assert prog.n_variables() == len(prog.variables)

    def test_demand_cap_enforced(self):
        inst = make_tiny_instance(0)
        big = inst.demand.copy()
        big[np.unravel_index(0, big.shape)] = 200
        from dataclasses import replace

        with pytest.raises(DomainError, match="too large"):
            linearize(replace(inst, demand=big))

    def test_dump_lists_rows(self):
        prog = linearize(make_tiny_instance(1))
        text = prog.dump()
        assert "C3[0]" in text and "sojourn[bs]" in text

    def test_objective_matches_domain_models(self):
        inst = make_tiny_instance(2)
        prog = linearize(inst)
        rng = np.random.default_rng(0)
        for _ in range(20):
            x, y = random_decision(inst, rng, feasible_bias=1.0)
            energy = models.total_energy(x, y, inst)
            value = float(np.sum(inst.value_coef * y))
            direct = inst.backlog * energy - inst.v_weight * value
            assert prog.evaluate_objective(x, y) == pytest.approx(direct, abs=1e-9)


class TestCheckAssignment:
    @pytest.mark.parametrize("seed", range(8))
    def test_verdict_matches_validator(self, seed):
        inst = make_tiny_instance(seed)
        prog = linearize(inst)
        rng = np.random.default_rng(seed + 1000)
        for _ in range(40):
            x, y = random_decision(inst, rng)
            ok, _ = prog.check_assignment(x, y)
            assert ok == models.validate(x, y, inst).feasible

    def test_reports_violated_row_names(self):
        inst = make_tiny_instance(0)
        prog = linearize(inst)
        x = np.ones((inst.n_rsus, inst.n_sds), dtype=np.int64)
        y = np.zeros((inst.n_rsus, inst.n_regions, inst.n_sds), dtype=np.int64)
        if (inst.sizes[None] * x).sum(axis=1).max() <= inst.storage.min():
            pytest.skip("catalog fits everywhere in this draw")
        ok, rows = prog.check_assignment(x, y)
        assert not ok
        assert any(name.startswith("C3") for name in rows)


class TestSolveBb:
    @pytest.mark.parametrize("seed", range(10))
    def test_agrees_with_oracle(self, seed):
        inst = make_tiny_instance(seed)
        sol = solve_bb(linearize(inst))
        oracle = enumerate_oracle(inst)
        assert sol.optimal
        assert sol.objective == pytest.approx(oracle.objective, abs=1e-9)

    def test_solution_is_feasible(self):
        inst = make_tiny_instance(11)
        sol = solve_bb(linearize(inst))
        assert models.validate(sol.x, sol.y, inst).feasible

    def test_zero_time_limit_raises(self):
        inst = make_tiny_instance(3)
        with pytest.raises(DomainError, match="time limit"):
            solve_bb(linearize(inst), time_limit_s=0.0)

    @pytest.mark.parametrize("seed", range(50))
    def test_knapsack_reduction(self, seed):
        inst = single_rsu_instance(seed)
        sol = solve_bb(linearize(inst))
        assert sol.objective == pytest.approx(knapsack_oracle(inst), abs=1e-9)


class TestOracle:
    def test_oracle_solution_feasible(self):
        inst = make_tiny_instance(4)
        sol = enumerate_oracle(inst)
        assert models.validate(sol.x, sol.y, inst).feasible

    def test_placement_space_guard(self):
        rng = np.random.default_rng(0)
        n_i, n_j, n_k = 3, 2, 8  # 24 placement bits > 2^20 states
        coverage = np.ones((n_i, n_j), dtype=bool)
        inst = SlotInstance(
            slot=0,
            backlog=0.0,
            v_weight=0.1,
            demand=np.ones((n_j, n_k), dtype=np.int64),
            rsu_rates=np.full((n_i, n_j), 1e8),
            bs_rates=np.full(n_j, 5e7),
            coverage=coverage,
            value_coef=rng.uniform(0, 1, (n_i, n_j, n_k)),
            sizes=np.full(n_k, 1e5),
            storage=np.full(n_i, 1e6),
            rsu_tx_power=np.ones(n_i),
            bs_tx_power=0.1,
            service_rates=np.full(n_i, 100.0),
            bs_service_rate=100.0,
            delay_tolerance=np.full(n_j, 10.0),
            cache_power_w_per_bit=1e-9,
        )
        with pytest.raises(DomainError, match="too large for enumeration"):
            enumerate_oracle(inst)
