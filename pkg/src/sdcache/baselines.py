"""Reference per-slot policies: value-greedy placement and random FIFO caching.

Both produce (x, y) pairs through the same allocation rule as the swarm
solver, so differences in the metrics come from the placement policy alone.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bqpso import allocate_y
from .slot import SlotInstance
from .types import DomainError


def stability_trim(y: np.ndarray, inst: SlotInstance) -> np.ndarray:
    """Drop allocation units until every RSU queue is stable.

    Lowest-value units go first; dropped demand falls back to the base
    station.  Base-station overload cannot be repaired here and is left to the
    constraint report.
    """
    y = y.copy()
    caps = np.floor(inst.service_rates - inst.stability_margin).astype(int)
    for i in range(inst.n_rsus):
        load = int(y[i].sum())
        if load <= caps[i]:
            continue
        units = sorted(
            ((float(inst.value_coef[i, j, k]), j, k)
             for j, k in np.argwhere(y[i] > 0)),
            key=lambda u: u[0],
        )
        excess = load - caps[i]
        for _, j, k in units:
            if excess <= 0:
                break
            cut = min(int(y[i, j, k]), excess)
            y[i, j, k] -= cut
            excess -= cut
    return y


def greedy_caching(inst: SlotInstance) -> np.ndarray:
    """Fill each RSU with the SDs of highest demand-weighted value per bit."""
    x = np.zeros((inst.n_rsus, inst.n_sds), dtype=np.int64)
    gain = np.einsum("ijk,jk->ik", inst.value_coef, inst.demand.astype(float))
    density = gain / inst.sizes[None, :]
    for i in range(inst.n_rsus):
        free = float(inst.storage[i])
        for k in np.argsort(-density[i], kind="stable"):
            if density[i, k] <= 0:
                break
            if inst.sizes[k] <= free:
                x[i, k] = 1
                free -= float(inst.sizes[k])
    return x


def greedy_solver():
    """Stateless value-greedy policy with the common solver signature."""

    def solve(inst: SlotInstance) -> tuple[np.ndarray, np.ndarray]:
        x = greedy_caching(inst)
        y = stability_trim(allocate_y(x, inst), inst)
        return x, y

    return solve


@dataclass
class FifoCacheState:
    """Per-RSU cache content with first-in-first-out eviction."""

    storage: np.ndarray  # (I,) capacity in bits
    sizes: np.ndarray  # (K,) SD sizes in bits
    queues: list[list[int]] = field(default_factory=list)  # insertion order per RSU

    def __post_init__(self) -> None:
        if not self.queues:
            self.queues = [[] for _ in range(len(self.storage))]

    def used(self, i: int) -> float:
        return float(sum(self.sizes[k] for k in self.queues[i]))

    def insert(self, i: int, k: int) -> bool:
        """Cache SD k at RSU i, evicting oldest entries as needed.

        Returns False when the SD cannot fit even into an empty cache.
        """
        if self.sizes[k] > self.storage[i]:
            return False
        if k in self.queues[i]:
            return True
        while self.used(i) + self.sizes[k] > self.storage[i]:
            self.queues[i].pop(0)
        self.queues[i].append(k)
        return True

    def resize(self, n_sds: int, sizes: np.ndarray) -> None:
        """Adopt a new SD catalog; entries that no longer fit are evicted."""
        self.sizes = sizes
        for i, q in enumerate(self.queues):
            self.queues[i] = [k for k in q if k < n_sds]
            while self.used(i) > self.storage[i]:
                self.queues[i].pop(0)

    def as_matrix(self, n_sds: int) -> np.ndarray:
        x = np.zeros((len(self.storage), n_sds), dtype=np.int64)
        for i, q in enumerate(self.queues):
            for k in q:
                x[i, k] = 1
        return x


@dataclass
class RandomCachePolicy:
    """Content-blind placement over a FIFO cache, the weakest reference policy.

    Each slot, every RSU inserts one uniformly random SD from the catalog;
    insertion evicts the oldest content first.  The state persists across
    slots so this is a proper online policy, not a per-slot reshuffle.
    """

    rng_seed: int = 0
    state: FifoCacheState | None = None
    _rng: np.random.Generator | None = None

    def __call__(self, inst: SlotInstance) -> tuple[np.ndarray, np.ndarray]:
        if self._rng is None:
            self._rng = np.random.default_rng(self.rng_seed)
        if self.state is None:
            self.state = FifoCacheState(
                storage=inst.storage.copy(), sizes=inst.sizes.copy()
            )
        elif len(self.state.storage) != inst.n_rsus:
            raise DomainError("cache state does not match instance topology")
        else:
            self.state.resize(inst.n_sds, inst.sizes.copy())

        for i in range(inst.n_rsus):
            k = int(self._rng.integers(inst.n_sds))
            self.state.insert(i, k)

        x = self.state.as_matrix(inst.n_sds)
        y = stability_trim(allocate_y(x, inst), inst)
        return x, y


def random_solver(rng_seed: int = 0) -> RandomCachePolicy:
    return RandomCachePolicy(rng_seed=rng_seed)
