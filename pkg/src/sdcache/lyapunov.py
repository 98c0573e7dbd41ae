"""Virtual-queue bookkeeping and the online slot loop.

The engine converts the long-term energy budget into a virtual queue, builds
one `SlotInstance` per slot, hands it to whichever per-slot solver is plugged
in, and records realized value/energy/delay.  Everything downstream of the
queue update is solver-agnostic.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from . import models
from .metrics import MetricsTrace, SlotRecord
from .scenario import Scenario
from .slot import SlotInstance
from .types import DomainError


@dataclass(frozen=True)
class LyapunovConfig:
    v_weight: float = 4e-3
    energy_budget_j: float = 35.0
    predictor: str = "oracle"  # or "last-value"
    penalty_gamma: float | None = None

    def __post_init__(self) -> None:
        if self.v_weight < 0 or self.energy_budget_j <= 0:
            raise DomainError("v_weight must be non-negative and budget positive")
        if self.predictor not in ("oracle", "last-value"):
            raise DomainError(f"unknown predictor {self.predictor!r}")


@dataclass
class VirtualQueueState:
    """Energy-overrun backlog Q(t) plus the realized (Q, E, V) history."""

    backlog: float = 0.0
    history: list[tuple[float, float, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.backlog < 0:
            raise DomainError("queue backlog cannot be negative")


def update_queue(state: VirtualQueueState, energy_j: float, budget_j: float,
                 value: float = 0.0) -> VirtualQueueState:
    """Apply the queue recurrence Q' = max(Q + E - budget, 0)."""
    if energy_j < 0:
        raise DomainError("negative slot energy")
    if budget_j <= 0:
        raise DomainError("budget must be positive")
    new_backlog = max(state.backlog + energy_j - budget_j, 0.0)
    return VirtualQueueState(
        backlog=new_backlog,
        history=state.history + [(state.backlog, energy_j, value)],
    )


def dpp_objective(inst: SlotInstance, x: np.ndarray, y: np.ndarray) -> float:
    """Drift-plus-penalty surrogate Q*E - V*value; lower is better."""
    energy = models.total_energy(x, y, inst)
    value = float(np.sum(inst.value_coef * y))
    return inst.backlog * energy - inst.v_weight * value


def drift_bound_constant(trace: list[tuple[float, float, float]], budget_j: float) -> float:
    """Drift-bound constant (E_max^2 + budget^2) / 2 from a realized trace."""
    if not trace:
        raise DomainError("empty trace")
    e_max = max(e for _, e, _ in trace)
    return (e_max**2 + budget_j**2) / 2.0


def check_drift_bound(
    backlogs: list[float], energies: list[float], budget_j: float
) -> list[bool]:
    """Verify the per-slot drift inequality on a realized path.

    Rejects traces whose backlogs do not follow the queue recurrence before
    checking the bound itself.
    """
    if len(backlogs) != len(energies) + 1 or len(energies) < 1:
        raise DomainError("trace too short or misaligned")
    for t, e in enumerate(energies):
        expected = max(backlogs[t] + e - budget_j, 0.0)
        if not math.isclose(backlogs[t + 1], expected, rel_tol=0, abs_tol=1e-9):
            raise DomainError(f"trace inconsistent with queue recurrence at slot {t}")
    bound = drift_bound_constant([(0.0, e, 0.0) for e in energies], budget_j)
    results = []
    for t, e in enumerate(energies):
        drift = 0.5 * (backlogs[t + 1] ** 2 - backlogs[t] ** 2)
        results.append(drift <= bound + backlogs[t] * (e - budget_j) + 1e-9)
    return results


class SlotSolver(Protocol):
    """Per-slot solver: returns an (x, y) decision pair for the instance."""

    def __call__(self, inst: SlotInstance) -> tuple[np.ndarray, np.ndarray]: ...


def build_slot_instance(
    scenario: Scenario,
    t: int,
    backlog: float,
    cfg: LyapunovConfig,
    demand: np.ndarray | None = None,
    rates: tuple[np.ndarray, np.ndarray] | None = None,
) -> SlotInstance:
    """Assemble the per-slot problem from scenario traces and queue state."""
    sc = scenario.config
    if rates is None:
        rsu_rates, bs_rates, _ = scenario.channel(t)
    else:
        rsu_rates, bs_rates = rates
    cov = scenario.coverage
    value_coef = (
        scenario.scope[t][:, None, :]
        * scenario.freshness[t][None, None, :]
        * scenario.popularity[t][None, :, :]
        * cov[:, :, None]
    )
    storage = np.array([r.storage_bits for r in scenario.topology.rsus], dtype=float)
    # Slack scales convert delay (s) and stability (requests) violations into
    # the storage-bit scale the penalty factor is calibrated against.  The
    # factor 100 makes even a 1% tolerance overshoot cost more than the whole
    # slot's value, so the penalized optimum never trades feasibility away.
    s_min = float(storage.min())
    delta_min = min(g.delay_tolerance_s for g in scenario.topology.regions)
    return SlotInstance(
        slot=t,
        backlog=backlog,
        v_weight=cfg.v_weight,
        demand=scenario.demand[t] if demand is None else demand,
        rsu_rates=rsu_rates,
        bs_rates=bs_rates,
        coverage=cov,
        value_coef=value_coef,
        sizes=scenario.sd_sizes.astype(float),
        storage=storage,
        rsu_tx_power=np.array([r.tx_power_w for r in scenario.topology.rsus]),
        bs_tx_power=scenario.topology.base_station.tx_power_w,
        service_rates=np.array([r.service_rate for r in scenario.topology.rsus]),
        bs_service_rate=scenario.topology.base_station.service_rate,
        delay_tolerance=np.array(
            [g.delay_tolerance_s for g in scenario.topology.regions]
        ),
        cache_power_w_per_bit=sc.caching_power_w_per_bit,
        slot_length_s=sc.slot_length_s,
        penalty_gamma=cfg.penalty_gamma,
        delay_slack_scale=100.0 * s_min / delta_min,
        stability_slack_scale=100.0 * s_min,
    )


def predict_demand(scenario: Scenario, t: int, predictor: str) -> np.ndarray:
    if predictor == "oracle":
        return scenario.demand[t]
    if t == 0:
        return np.zeros_like(scenario.demand[0])
    return scenario.demand[t - 1]


def trim_to_demand(y: np.ndarray, demand: np.ndarray) -> np.ndarray:
    """Clamp an allocation so per-(j,k) totals never exceed realized demand.

    Excess is removed from the highest-index RSUs first, deterministically.
    Needed when the solver planned against a demand prediction.
    """
    y = y.copy()
    excess = y.sum(axis=0) - demand
    for j, k in np.argwhere(excess > 0):
        over = int(excess[j, k])
        for i in range(y.shape[0] - 1, -1, -1):
            if over == 0:
                break
            cut = min(int(y[i, j, k]), over)
            y[i, j, k] -= cut
            over -= cut
    return y


def ocda_run(
    scenario: Scenario,
    solver: SlotSolver,
    cfg: LyapunovConfig,
    horizon: int | None = None,
    on_slot: Callable[[int], None] | None = None,
) -> MetricsTrace:
    """Run the online loop: predict, observe, solve, realize, update queue."""
    T = scenario.horizon if horizon is None else min(horizon, scenario.horizon)
    queue = VirtualQueueState()
    trace = MetricsTrace()
    for t in range(T):
        predicted = predict_demand(scenario, t, cfg.predictor)
        rsu_rates, bs_rates, _ = scenario.channel(t)
        inst = build_slot_instance(
            scenario, t, queue.backlog, cfg, demand=predicted,
            rates=(rsu_rates, bs_rates),
        )
        start = time.perf_counter()
        infeasible = False
        try:
            x, y = solver(inst)
        except DomainError:
            x = np.zeros((inst.n_rsus, inst.n_sds), dtype=np.int64)
            y = np.zeros((inst.n_rsus, inst.n_regions, inst.n_sds), dtype=np.int64)
            infeasible = True
        wall = time.perf_counter() - start

        realized = build_slot_instance(
            scenario, t, queue.backlog, cfg, rates=(rsu_rates, bs_rates)
        )
        y = trim_to_demand(y, realized.demand)
        energy = models.total_energy(x, y, realized)
        value = float(np.sum(realized.value_coef * y))
        delays = models.region_delays(y, realized, clamp=True)
        total_demand = int(realized.demand.sum())
        hit = float(y.sum()) / total_demand if total_demand > 0 else math.nan
        from .bqpso import fitness as bqpso_fitness

        fit = bqpso_fitness(x, realized, realized.gamma, y=y)
        trace.append(
            SlotRecord(
                t=t,
                value=value,
                energy=energy,
                backlog=queue.backlog,
                max_delay=float(delays.max(initial=0.0)),
                cache_hit_ratio=hit,
                fitness=fit,
                infeasible=infeasible,
                wall_time_s=wall,
            )
        )
        queue = update_queue(queue, energy, cfg.energy_budget_j, value=value)
        if on_slot is not None:
            on_slot(t)
    trace.final_backlog = queue.backlog
    return trace
