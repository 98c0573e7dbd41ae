"""Shared domain types for the caching simulator.

Everything here is an immutable value object: construction validates the
invariants once, after which instances are safe to share between threads.
Decision matrices are wrapped in thin dataclasses so dimension checks happen
at the boundary instead of deep inside the evaluators.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import FrozenSet, Sequence, Tuple

import numpy as np

Point = Tuple[float, float]


class DomainError(ValueError):
    """Raised when a model precondition is violated."""


def euclidean(a: Point, b: Point) -> float:
    return float(np.hypot(a[0] - b[0], a[1] - b[1]))


@dataclass(frozen=True)
class SensingDatum:
    """A time- and space-limited content item generated by roadside sensors."""

    id: int
    size_bits: int
    update_slot: int
    expiry_slot: int
    origin: Point
    validity_radius_m: float

    def __post_init__(self) -> None:
        if self.size_bits <= 0:
            raise DomainError(f"SD {self.id}: size_bits must be positive")
        if self.expiry_slot <= self.update_slot:
            raise DomainError(f"SD {self.id}: expiry_slot must exceed update_slot")
        if self.validity_radius_m < 0:
            raise DomainError(f"SD {self.id}: negative validity radius")


@dataclass(frozen=True)
class Rsu:
    """Edge node with finite storage, bandwidth and request service rate."""

    id: int
    location: Point
    storage_bits: int
    bandwidth_hz: float
    tx_power_w: float
    service_rate: float
    coverage_radius_m: float

    def __post_init__(self) -> None:
        for name in ("storage_bits", "bandwidth_hz", "tx_power_w", "service_rate",
                     "coverage_radius_m"):
            if getattr(self, name) <= 0:
                raise DomainError(f"RSU {self.id}: {name} must be strictly positive")


@dataclass(frozen=True)
class BaseStation:
    """Fallback server: caches everything but serves each region slower than
    any covering RSU."""

    tx_power_w: float
    service_rate: float
    region_rates: Tuple[float, ...]

    def __post_init__(self) -> None:
        if self.tx_power_w <= 0 or self.service_rate <= 0:
            raise DomainError("base station powers and rates must be positive")
        if any(r <= 0 for r in self.region_rates):
            raise DomainError("base station region rates must be positive")


@dataclass(frozen=True)
class Region:
    """Spatial demand cell; the unit of request allocation."""

    id: int
    center: Point
    delay_tolerance_s: float
    covering_rsus: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.delay_tolerance_s <= 0:
            raise DomainError(f"region {self.id}: delay tolerance must be positive")
        if len(self.covering_rsus) == 0:
            raise DomainError(f"region {self.id}: not covered by any RSU")


@dataclass(frozen=True)
class Topology:
    """RSUs, BS, regions and the symmetric coverage maps."""

    rsus: Tuple[Rsu, ...]
    base_station: BaseStation
    regions: Tuple[Region, ...]

    def __post_init__(self) -> None:
        for region in self.regions:
            for i in region.covering_rsus:
                if not 0 <= i < len(self.rsus):
                    raise DomainError(f"region {region.id}: unknown RSU {i}")

    @property
    def n_rsus(self) -> int:
        return len(self.rsus)

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    def coverage_matrix(self) -> np.ndarray:
        """Boolean (I, J) matrix; entry (i, j) true iff RSU i covers region j."""
        cov = np.zeros((self.n_rsus, self.n_regions), dtype=bool)
        for region in self.regions:
            for i in region.covering_rsus:
                cov[i, region.id] = True
        return cov

    def regions_of(self, rsu_id: int) -> Tuple[int, ...]:
        return tuple(r.id for r in self.regions if rsu_id in r.covering_rsus)


@dataclass(frozen=True)
class SlotObservation:
    """Per-slot observables fed to the decision engine.

    ``channel_gain_samples`` maps a covered (rsu, region) pair to the list of
    linear gain draws realized this slot.  ``traffic_rules`` is the opaque set
    of (rsu, sd) exclusion pairs currently active.
    """

    slot: int
    demand: np.ndarray  # (J, K) non-negative ints
    scope: np.ndarray  # (I, K) binary
    channel_gain_samples: dict  # (i, j) -> np.ndarray of gains
    traffic_rules: FrozenSet[Tuple[int, int]] = frozenset()

    def __post_init__(self) -> None:
        if np.any(self.demand < 0):
            raise DomainError("demand entries must be non-negative")
        if not np.isin(self.scope, (0, 1)).all():
            raise DomainError("scope entries must be binary")
        for key, samples in self.channel_gain_samples.items():
            if len(samples) == 0:
                raise DomainError(f"no channel observation for pair {key}")


@dataclass
class RequestHistory:
    """Per (region, SD) request counters driving the popularity model.

    ``last_interval_slots`` is the gap between the last two requests,
    ``gap_slots`` the time since the most recent one, and
    ``cumulative_requests`` the total request count seen so far.
    """

    n_regions: int
    n_sds: int
    last_interval_slots: np.ndarray = field(default=None)  # type: ignore[assignment]
    gap_slots: np.ndarray = field(default=None)  # type: ignore[assignment]
    cumulative_requests: np.ndarray = field(default=None)  # type: ignore[assignment]
    _last_request: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    _second_last: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        shape = (self.n_regions, self.n_sds)
        if self.last_interval_slots is None:
            self.last_interval_slots = np.zeros(shape, dtype=np.int64)
        if self.gap_slots is None:
            self.gap_slots = np.zeros(shape, dtype=np.int64)
        if self.cumulative_requests is None:
            self.cumulative_requests = np.zeros(shape, dtype=np.int64)
        if self._last_request is None:
            self._last_request = np.full(shape, -1, dtype=np.int64)
        if self._second_last is None:
            self._second_last = np.full(shape, -1, dtype=np.int64)

    def advance(self, slot: int, realized_demand: np.ndarray) -> None:
        """Fold one slot of realized demand into the counters.

        Must be called once per slot in order; the counters afterwards describe
        the history *before* slot ``slot + 1``.
        """
        requested = realized_demand > 0
        self._second_last = np.where(requested, self._last_request, self._second_last)
        self._last_request = np.where(requested, slot, self._last_request)
        self.cumulative_requests = self.cumulative_requests + realized_demand.astype(np.int64)
        seen = self._last_request >= 0
        next_slot = slot + 1
        self.gap_slots = np.where(seen, next_slot - self._last_request, 0)
        both = self._second_last >= 0
        # With a single request on record the interval falls back to the gap.
        self.last_interval_slots = np.where(
            both, self._last_request - self._second_last, self.gap_slots
        )


@dataclass(frozen=True)
class CachingDecision:
    """Binary placement X: x[i, k] == 1 iff SD k is cached at RSU i."""

    x: np.ndarray

    def __post_init__(self) -> None:
        if self.x.ndim != 2:
            raise DomainError("caching decision must be an (I, K) matrix")
        if not np.isin(self.x, (0, 1)).all():
            raise DomainError("caching decision entries must be binary")
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.int64))


@dataclass(frozen=True)
class AllocationDecision:
    """Integer allocation Y: y[i, j, k] requests of region j for SD k served
    by RSU i.  Entries outside coverage must be zero."""

    y: np.ndarray
    coverage: np.ndarray | None = None  # optional (I, J) mask for validation

    def __post_init__(self) -> None:
        if self.y.ndim != 3:
            raise DomainError("allocation decision must be an (I, J, K) tensor")
        if np.any(self.y < 0):
            raise DomainError("allocation entries must be non-negative")
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.int64))
        if self.coverage is not None:
            outside = self.y[~np.asarray(self.coverage, dtype=bool)]
            if outside.size and np.any(outside != 0):
                raise DomainError("allocation outside RSU coverage")


@dataclass(frozen=True)
class ValueWeights:
    """Popularity impact factors (alpha for interval, beta for recency)."""

    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise DomainError("alpha and beta must lie in [0, 1]")


@dataclass(frozen=True)
class ConstraintViolation:
    constraint: str  # one of C2, C3, C4, C5, QS
    indices: Tuple[int, ...]
    slack: float


@dataclass(frozen=True)
class ConstraintReport:
    violations: Tuple[ConstraintViolation, ...] = ()

    @property
    def feasible(self) -> bool:
        return len(self.violations) == 0

    def of(self, constraint: str) -> Tuple[ConstraintViolation, ...]:
        return tuple(v for v in self.violations if v.constraint == constraint)

    def total_slack(self, constraints: Sequence[str]) -> float:
        return float(sum(v.slack for v in self.violations if v.constraint in constraints))
