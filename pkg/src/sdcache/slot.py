"""Single-slot problem instance.

A `SlotInstance` bundles everything a per-slot solver needs: the current
virtual-queue backlog, the demand matrix, expected transmission rates, the
value coefficients A*F*H and the energy/capacity/latency parameters.  All
arrays are read-only; solvers never mutate an instance.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .types import DomainError


@dataclass(frozen=True)
class SlotInstance:
    slot: int
    backlog: float  # Q(t), joules-per-slot units
    v_weight: float  # trade-off weight on caching value
    demand: np.ndarray  # (J, K) ints
    rsu_rates: np.ndarray  # (I, J) expected bits/s, NaN outside coverage
    bs_rates: np.ndarray  # (J,) bits/s
    coverage: np.ndarray  # (I, J) bool
    value_coef: np.ndarray  # (I, J, K): A_ik * F_k * H_jk, zero outside coverage
    sizes: np.ndarray  # (K,) bits
    storage: np.ndarray  # (I,) bits
    rsu_tx_power: np.ndarray  # (I,) watts
    bs_tx_power: float
    service_rates: np.ndarray  # (I,) requests/slot
    bs_service_rate: float
    delay_tolerance: np.ndarray  # (J,) seconds
    cache_power_w_per_bit: float
    slot_length_s: float = 1.0
    stability_margin: float = 1e-3
    penalty_gamma: float | None = None  # None -> auto-calibrated
    # Unit-conversion scales applied to delay and queue-stability slacks
    # before the penalty factor, so a single gamma covers all families.
    delay_slack_scale: float = 1.0
    stability_slack_scale: float = 1.0

    def __post_init__(self) -> None:
        i, j = self.coverage.shape
        k = self.sizes.shape[0]
        if self.demand.shape != (j, k):
            raise DomainError("demand shape does not match topology")
        if self.rsu_rates.shape != (i, j) or self.value_coef.shape != (i, j, k):
            raise DomainError("rate/value coefficient shapes do not match topology")
        if self.backlog < 0:
            raise DomainError("queue backlog cannot be negative")

    @property
    def n_rsus(self) -> int:
        return self.coverage.shape[0]

    @property
    def n_regions(self) -> int:
        return self.coverage.shape[1]

    @property
    def n_sds(self) -> int:
        return self.sizes.shape[0]

    # --- linear objective coefficients (P2 is linear in x and y) ---

    @property
    def cache_energy_coef(self) -> np.ndarray:
        """(K,) joules for keeping one SD cached for one slot."""
        return self.cache_power_w_per_bit * self.sizes * self.slot_length_s

    @property
    def rsu_energy_coef(self) -> np.ndarray:
        """(I, J, K) joules per allocated request served by an RSU."""
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(self.coverage, 1.0 / self.rsu_rates, 0.0)
        return self.rsu_tx_power[:, None, None] * self.sizes[None, None, :] * inv[:, :, None]

    @property
    def bs_energy_coef(self) -> np.ndarray:
        """(J, K) joules per request left to the base station."""
        return self.bs_tx_power * self.sizes[None, :] / self.bs_rates[:, None]

    @property
    def objective_const(self) -> float:
        """Objective value at x = 0, y = 0 (all demand falls to the BS)."""
        return float(self.backlog * np.sum(self.bs_energy_coef * self.demand))

    @property
    def objective_x_coef(self) -> np.ndarray:
        """(I, K) objective contribution per caching bit set."""
        return np.broadcast_to(
            self.backlog * self.cache_energy_coef[None, :],
            (self.n_rsus, self.n_sds),
        ).copy()

    @property
    def objective_y_coef(self) -> np.ndarray:
        """(I, J, K) objective contribution per allocated request."""
        delta_e = self.rsu_energy_coef - self.bs_energy_coef[None, :, :]
        coef = self.backlog * delta_e - self.v_weight * self.value_coef
        return np.where(self.coverage[:, :, None], coef, 0.0)

    @property
    def gamma(self) -> float:
        """Penalty factor: explicit value, or auto-calibrated so a 1% storage
        violation outweighs the largest value gain available this slot."""
        if self.penalty_gamma is not None:
            return self.penalty_gamma
        v_max = float(np.sum(self.demand))
        s_min = float(np.min(self.storage))
        return 10.0 * max(self.v_weight * v_max, 1e-12) / s_min

    def covered_pairs(self) -> list[tuple[int, int]]:
        idx = np.argwhere(self.coverage)
        return [(int(i), int(j)) for i, j in idx]

    def rsus_covering(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.coverage[:, j])
