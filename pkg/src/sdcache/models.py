"""Value, energy, delay and constraint evaluation.

These are the pure model primitives everything else is built on: the expected
transmission rate, the freshness/scope/popularity value factors, the slot
energy bill, the M/M/1 sojourn latencies and the feasibility checker.  The
per-slot solvers and the metrics pipeline both route through this module so
there is exactly one definition of each quantity.
"""
from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .slot import SlotInstance
from .types import (
    AllocationDecision,
    CachingDecision,
    ConstraintReport,
    ConstraintViolation,
    DomainError,
    RequestHistory,
    Rsu,
    SensingDatum,
    SlotObservation,
    ValueWeights,
    euclidean,
)

#: Expected rates below this floor are treated as a broken link (no
#: connectivity assumption of the model would hold).
RATE_FLOOR_BPS = 1e3


def expected_rate(
    rsu: Rsu,
    region_index: int,
    obs: SlotObservation,
    noise_power_w: float,
) -> float:
    """Monte-Carlo estimate of the expected Shannon rate to a region, bits/s."""
    if noise_power_w <= 0:
        raise DomainError("invalid noise power")
    samples = obs.channel_gain_samples.get((rsu.id, region_index))
    if samples is None or len(samples) == 0:
        raise DomainError(f"no channel observation for RSU {rsu.id}, region {region_index}")
    gains = np.asarray(samples, dtype=float)
    snr = gains * rsu.tx_power_w / noise_power_w
    rate = float(np.mean(rsu.bandwidth_hz * np.log2(1.0 + snr)))
    if rate < RATE_FLOOR_BPS:
        raise DomainError(
            f"degenerate channel: mean rate {rate:.3g} b/s below floor for "
            f"RSU {rsu.id}, region {region_index}"
        )
    return rate


def freshness(sd: SensingDatum, t: int) -> float:
    """Remaining fraction of the SD lifespan, clamped to [0, 1]."""
    if t < sd.update_slot:
        raise DomainError(f"SD {sd.id} not yet generated at slot {t}")
    return max((sd.expiry_slot - t) / (sd.expiry_slot - sd.update_slot), 0.0)


def affected_scope(
    sd: SensingDatum,
    rsu: Rsu,
    rules: Iterable[tuple[int, int]],
    t: int,
) -> int:
    """1 iff the RSU sits inside the SD's validity radius and no traffic rule
    excludes the pair this slot."""
    if euclidean(sd.origin, rsu.location) > sd.validity_radius_m:
        return 0
    if (rsu.id, sd.id) in rules:
        return 0
    return 1


def popularity(history: RequestHistory, j: int, k: int, weights: ValueWeights) -> float:
    """Exponential-decay popularity score in [0, 1]; 0 for never-requested SDs."""
    total = int(history.cumulative_requests[j, k])
    if total == 0:
        return 0.0
    r = float(history.last_interval_slots[j, k])
    z = float(history.gap_slots[j, k])
    return 0.5 * (
        weights.alpha * math.exp(-r / total) + weights.beta * math.exp(-z / total)
    )


def popularity_matrix(history: RequestHistory, weights: ValueWeights) -> np.ndarray:
    """Vectorized popularity over all (region, SD) pairs."""
    total = history.cumulative_requests.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = 0.5 * (
            weights.alpha * np.exp(-history.last_interval_slots / total)
            + weights.beta * np.exp(-history.gap_slots / total)
        )
    return np.where(total > 0, h, 0.0)


def caching_value(
    y: np.ndarray,
    scope: np.ndarray,
    fresh: np.ndarray,
    pop: np.ndarray,
    coverage: np.ndarray | None = None,
) -> float:
    """Slot caching value: sum of A_ik * F_k * H_jk * y_ijk over covered triples."""
    i, j, k = y.shape
    if scope.shape != (i, k) or fresh.shape != (k,) or pop.shape != (j, k):
        raise DomainError("value factor dimensions do not match allocation")
    coef = scope[:, None, :] * fresh[None, None, :] * pop[None, :, :]
    if coverage is not None:
        coef = coef * coverage[:, :, None]
    return float(np.sum(coef * y))


def total_energy(x: np.ndarray, y: np.ndarray, inst: SlotInstance) -> float:
    """Slot energy bill in joules: caching + RSU transmission + BS fallback."""
    residual = inst.demand - y.sum(axis=0)
    if np.any(residual < -1e-9):
        raise DomainError("allocation exceeds demand")
    caching = float(np.sum(inst.cache_energy_coef[None, :] * x))
    rsu_tx = float(np.sum(inst.rsu_energy_coef * y))
    bs_tx = float(np.sum(inst.bs_energy_coef * residual))
    return caching + rsu_tx + bs_tx


def transmission_delay_rsu(i: int, j: int, y: np.ndarray, inst: SlotInstance) -> float:
    rate = inst.rsu_rates[i, j]
    if not inst.coverage[i, j] or not rate > 0:
        raise DomainError(f"RSU {i} has no positive rate towards region {j}")
    return float(np.sum(inst.sizes * y[i, j, :]) / rate)


def transmission_delay_bs(j: int, y: np.ndarray, inst: SlotInstance) -> float:
    residual = inst.demand[j] - y[:, j, :].sum(axis=0)
    if np.any(residual < 0):
        raise DomainError("allocation exceeds demand")
    return float(np.sum(inst.sizes * residual) / inst.bs_rates[j])


def rsu_load(y: np.ndarray) -> np.ndarray:
    """(I,) total requests allocated to each RSU."""
    return y.sum(axis=(1, 2))


def bs_load(y: np.ndarray, demand: np.ndarray) -> float:
    return float(demand.sum() - y.sum())


def sojourn_latency_rsu(i: int, y: np.ndarray, mu_i: float) -> float:
    load = float(rsu_load(y)[i])
    if load >= mu_i:
        raise DomainError(f"queue unstable at RSU {i}: load {load} >= mu {mu_i}")
    return 1.0 / (mu_i - load)


def sojourn_latency_bs(y: np.ndarray, demand: np.ndarray, mu_0: float) -> float:
    load = bs_load(y, demand)
    if load >= mu_0:
        raise DomainError(f"queue unstable at BS: load {load} >= mu {mu_0}")
    return 1.0 / (mu_0 - load)


def response_latency(j: int, y: np.ndarray, inst: SlotInstance) -> float:
    """Region response latency: slowest active parallel path, 0 if no demand."""
    if inst.demand[j].sum() == 0:
        return 0.0
    terms: list[float] = []
    for i in inst.rsus_covering(j):
        if y[i, j, :].sum() > 0:
            terms.append(
                sojourn_latency_rsu(i, y, float(inst.service_rates[i]))
                + transmission_delay_rsu(i, j, y, inst)
            )
    residual = inst.demand[j] - y[:, j, :].sum(axis=0)
    if residual.sum() > 0:
        terms.append(
            sojourn_latency_bs(y, inst.demand, inst.bs_service_rate)
            + transmission_delay_bs(j, y, inst)
        )
    return max(terms) if terms else 0.0


def region_delays(y: np.ndarray, inst: SlotInstance, clamp: bool = False) -> np.ndarray:
    """(J,) response latencies.

    With ``clamp`` the M/M/1 terms saturate at the stability margin instead of
    raising, returning a large-but-finite delay for overloaded queues; metrics
    code uses this so infeasible baseline decisions stay measurable.
    """
    mu = inst.service_rates.astype(float)
    loads = rsu_load(y).astype(float)
    margins = mu - loads
    bs_margin = inst.bs_service_rate - bs_load(y, inst.demand)
    if clamp:
        margins = np.maximum(margins, inst.stability_margin)
        bs_margin = max(bs_margin, inst.stability_margin)
    elif np.any(margins <= 0) or bs_margin <= 0:
        raise DomainError("queue unstable")
    l_rsu = 1.0 / margins
    l_bs = 1.0 / bs_margin
    delays = np.zeros(inst.n_regions)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_rate = np.where(inst.coverage, 1.0 / inst.rsu_rates, 0.0)
    for j in range(inst.n_regions):
        if inst.demand[j].sum() == 0:
            continue
        terms = []
        for i in inst.rsus_covering(j):
            if y[i, j, :].sum() > 0:
                terms.append(l_rsu[i] + float(np.sum(inst.sizes * y[i, j, :])) * inv_rate[i, j])
        residual = inst.demand[j] - y[:, j, :].sum(axis=0)
        if residual.sum() > 0:
            terms.append(l_bs + float(np.sum(inst.sizes * residual)) / inst.bs_rates[j])
        delays[j] = max(terms) if terms else 0.0
    return delays


def validate(x: np.ndarray, y: np.ndarray, inst: SlotInstance) -> ConstraintReport:
    """Full feasibility report for a decision pair on one slot.

    Covers storage (C3), cache-before-serve (C4), demand bounds (C5), queue
    stability with the configured margin (QS) and the region delay tolerances
    (C2).  Violations are data, not errors; an empty report means feasible.
    """
    violations: list[ConstraintViolation] = []

    used = (inst.sizes[None, :] * x).sum(axis=1)
    for i in np.flatnonzero(used > inst.storage):
        violations.append(ConstraintViolation("C3", (int(i),), float(used[i] - inst.storage[i])))

    linked = y > inst.demand[None, :, :] * x[:, None, :]
    for i, j, k in np.argwhere(linked):
        slack = float(y[i, j, k] - inst.demand[j, k] * x[i, k])
        violations.append(ConstraintViolation("C4", (int(i), int(j), int(k)), slack))

    served = y.sum(axis=0)
    over = served > inst.demand
    for j, k in np.argwhere(over):
        violations.append(
            ConstraintViolation("C5", (int(j), int(k)), float(served[j, k] - inst.demand[j, k]))
        )

    off_coverage = y * (~inst.coverage[:, :, None])
    for i, j, k in np.argwhere(off_coverage > 0):
        violations.append(ConstraintViolation("C4", (int(i), int(j), int(k)), float(y[i, j, k])))

    loads = rsu_load(y).astype(float)
    caps = inst.service_rates - inst.stability_margin
    for i in np.flatnonzero(loads > caps):
        violations.append(ConstraintViolation("QS", (int(i),), float(loads[i] - caps[i])))
    bs = bs_load(y, inst.demand)
    bs_cap = inst.bs_service_rate - inst.stability_margin
    if bs > bs_cap:
        violations.append(ConstraintViolation("QS", (-1,), float(bs - bs_cap)))

    delays = region_delays(y, inst, clamp=True)
    for j in np.flatnonzero(delays > inst.delay_tolerance):
        violations.append(
            ConstraintViolation("C2", (int(j),), float(delays[j] - inst.delay_tolerance[j]))
        )

    return ConstraintReport(tuple(violations))


def validate_decisions(
    caching: CachingDecision, allocation: AllocationDecision, inst: SlotInstance
) -> ConstraintReport:
    return validate(caching.x, allocation.y, inst)
