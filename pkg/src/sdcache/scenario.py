"""Seeded generation of the simulated vehicular world.

A scenario is fully determined by its config and seed: topology and demand
traces are materialized up front, while the (bulky) per-slot channel draws are
regenerated on demand from a per-slot seed so that access is random,
reproducible and memory-cheap.
"""
from __future__ import annotations

import gzip
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import models
from .types import (
    BaseStation,
    DomainError,
    Region,
    RequestHistory,
    Rsu,
    SensingDatum,
    SlotObservation,
    Topology,
    ValueWeights,
)

SNAPSHOT_VERSION = 1

#: vehicles per region for the four congestion presets
CONGESTION_LEVELS = {"none": 6, "light": 8, "moderate": 10, "heavy": 12}

_CHANNEL_TAG = 0x5DCA
_ONE_WAY_TAG = 0x0513


@dataclass(frozen=True)
class ScenarioConfig:
    """World description with defaults matching the reference simulation."""

    area_w_m: float = 800.0
    area_h_m: float = 500.0
    region_rows: int = 4
    region_cols: int = 4
    n_rsus: int = 6
    coverage_min_regions: int = 5
    coverage_max_regions: int = 8
    sd_per_region: int = 5
    sd_size_bits_min: int = 1_000_000
    sd_size_bits_max: int = 10_000_000
    sd_lifespan_min_slots: int = 1
    sd_lifespan_max_slots: int = 100
    validity_radius_m: float = 100.0
    rsu_capacity_bits_min: int = 100_000_000
    rsu_capacity_bits_max: int = 500_000_000
    delay_tolerance_s: float = 0.5
    caching_power_w_per_bit: float = 2.5e-9
    # log-distance path loss with log-normal shadowing
    pathloss_d0_m: float = 1000.0
    pathloss_pl0_db: float = 28.0
    pathloss_exponent: float = 2.0
    shadowing_sigma_db: float = 8.0
    rsu_tx_power_dbm: float = 30.0
    bs_tx_power_w: float = 0.1
    bandwidth_hz: float = 20e6
    noise_dbm_per_hz: float = -174.0
    rsu_coverage_radius_min_m: float = 150.0
    rsu_coverage_radius_max_m: float = 320.0
    rsu_service_rate: float = 20.0
    bs_service_rate: float = 60.0
    bs_rate_fraction: float = 0.5  # r_0j as a fraction of the slowest covering RSU
    congestion: str = "moderate"
    demand_base_rate: float = 0.5  # requests per vehicle per slot
    zipf_exponent: float = 0.8
    channel_samples: int = 100
    one_way_window_slots: int = 300
    popularity_alpha: float = 1.0
    popularity_beta: float = 1.0
    horizon_slots: int = 1800
    slot_length_s: float = 1.0
    topology_retries: int = 5000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.congestion not in CONGESTION_LEVELS:
            raise DomainError(f"unknown congestion preset {self.congestion!r}")
        if self.region_rows * self.region_cols < 1 or self.n_rsus < 1:
            raise DomainError("topology must have at least one region and RSU")

    @property
    def n_regions(self) -> int:
        return self.region_rows * self.region_cols

    @property
    def n_sds(self) -> int:
        return self.n_regions * self.sd_per_region

    @property
    def vehicles_per_region(self) -> int:
        return CONGESTION_LEVELS[self.congestion]

    @property
    def rsu_tx_power_w(self) -> float:
        return 10 ** (self.rsu_tx_power_dbm / 10.0) / 1000.0

    @property
    def noise_power_w(self) -> float:
        dbm = self.noise_dbm_per_hz + 10.0 * np.log10(self.bandwidth_hz)
        return float(10 ** (dbm / 10.0) / 1000.0)

    def streets(self) -> list[tuple[str, float]]:
        """One horizontal and two vertical bidirectional streets."""
        return [
            ("h", self.area_h_m / 2.0),
            ("v", self.area_w_m / 3.0),
            ("v", 2.0 * self.area_w_m / 3.0),
        ]


def sample_channel(cfg: ScenarioConfig, distance_m: float, rng: np.random.Generator,
                   size: int = 1) -> np.ndarray:
    """Linear channel gains from the log-distance model with shadowing."""
    if distance_m <= 0:
        raise DomainError("distance must be positive")
    pl_db = (
        cfg.pathloss_pl0_db
        + 10.0 * cfg.pathloss_exponent * np.log10(distance_m / cfg.pathloss_d0_m)
        + rng.normal(0.0, cfg.shadowing_sigma_db, size=size)
    )
    return 10 ** (-pl_db / 10.0)


def build_topology(cfg: ScenarioConfig, rng: np.random.Generator) -> Topology:
    """Grid regions plus street-mounted RSUs with re-drawn placements until
    every RSU covers the configured number of regions and no region is bare."""
    rw = cfg.area_w_m / cfg.region_cols
    rh = cfg.area_h_m / cfg.region_rows
    centers = [
        ((c + 0.5) * rw, (r + 0.5) * rh)
        for r in range(cfg.region_rows)
        for c in range(cfg.region_cols)
    ]
    streets = cfg.streets()

    for _ in range(cfg.topology_retries):
        locations = []
        radii = []
        for _ in range(cfg.n_rsus):
            kind, pos = streets[rng.integers(len(streets))]
            if kind == "h":
                loc = (float(rng.uniform(0, cfg.area_w_m)), pos)
            else:
                loc = (pos, float(rng.uniform(0, cfg.area_h_m)))
            locations.append(loc)
            radii.append(float(rng.uniform(cfg.rsu_coverage_radius_min_m,
                                           cfg.rsu_coverage_radius_max_m)))
        covered = [
            [
                j for j, c in enumerate(centers)
                if np.hypot(c[0] - locations[i][0], c[1] - locations[i][1]) <= radii[i]
            ]
            for i in range(cfg.n_rsus)
        ]
        counts_ok = all(
            cfg.coverage_min_regions <= len(c) <= cfg.coverage_max_regions for c in covered
        )
        all_covered = set().union(*covered) == set(range(len(centers))) if covered else False
        if not (counts_ok and all_covered):
            continue

        storages = rng.integers(cfg.rsu_capacity_bits_min, cfg.rsu_capacity_bits_max + 1,
                                size=cfg.n_rsus)
        rsus = tuple(
            Rsu(
                id=i,
                location=locations[i],
                storage_bits=int(storages[i]),
                bandwidth_hz=cfg.bandwidth_hz,
                tx_power_w=cfg.rsu_tx_power_w,
                service_rate=cfg.rsu_service_rate,
                coverage_radius_m=radii[i],
            )
            for i in range(cfg.n_rsus)
        )
        regions = tuple(
            Region(
                id=j,
                center=centers[j],
                delay_tolerance_s=cfg.delay_tolerance_s,
                covering_rsus=tuple(i for i in range(cfg.n_rsus) if j in covered[i]),
            )
            for j in range(len(centers))
        )
        # Region rates are slot-dependent; the placeholder keeps the type
        # total and is overwritten by the per-slot channel realization.
        bs = BaseStation(
            tx_power_w=cfg.bs_tx_power_w,
            service_rate=cfg.bs_service_rate,
            region_rates=tuple(1.0 for _ in regions),
        )
        return Topology(rsus=rsus, base_station=bs, regions=regions)

    raise DomainError("coverage constraint unsatisfiable with given radii")


def _zipf_weights(n: int, exponent: float) -> np.ndarray:
    w = np.arange(1, n + 1, dtype=float) ** (-exponent)
    return w / w.sum()


def generate_demand(
    cfg: ScenarioConfig,
    region_sds: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """One slot of Poisson demand, concentrated on each region's own SDs with
    a Zipf popularity profile."""
    demand = np.zeros((cfg.n_regions, cfg.n_sds), dtype=np.int64)
    weights = _zipf_weights(cfg.sd_per_region, cfg.zipf_exponent)
    lam = cfg.vehicles_per_region * cfg.demand_base_rate
    for j in range(cfg.n_regions):
        demand[j, region_sds[j]] = rng.poisson(lam * weights)
    return demand


@dataclass
class SdCatalog:
    """Mutable SD lifecycle state: ids are stable, content regenerates."""

    sds: list[SensingDatum]

    def evolve(self, cfg: ScenarioConfig, slot: int, rng: np.random.Generator) -> None:
        """Regenerate every SD that expired at or before this slot."""
        for idx, sd in enumerate(self.sds):
            if slot >= sd.expiry_slot:
                lifespan = int(rng.integers(cfg.sd_lifespan_min_slots,
                                            cfg.sd_lifespan_max_slots + 1))
                self.sds[idx] = replace(sd, update_slot=slot, expiry_slot=slot + lifespan)


def _one_way_rules(cfg: ScenarioConfig, topology: Topology,
                   catalog: list[SensingDatum], slot: int) -> frozenset:
    """Street 0 turns one-way in alternating windows; RSUs on it then ignore
    SDs originating downstream of them."""
    window = slot // cfg.one_way_window_slots
    if window % 2 == 0:
        return frozenset()
    _, street_y = cfg.streets()[0]
    excluded = set()
    for rsu in topology.rsus:
        if abs(rsu.location[1] - street_y) < 1e-6:
            for sd in catalog:
                if sd.origin[0] > rsu.location[0]:
                    excluded.add((rsu.id, sd.id))
    return frozenset(excluded)


@dataclass
class Scenario:
    """Immutable world: topology plus per-slot demand/value/scope traces.

    Channel realizations are produced lazily by :meth:`channel`; everything
    else is precomputed at build time.
    """

    config: ScenarioConfig
    topology: Topology
    region_sds: np.ndarray  # (J, sd_per_region) SD ids owned by each region
    sd_sizes: np.ndarray  # (K,) bits, fixed at catalog creation
    demand: np.ndarray  # (T, J, K)
    freshness: np.ndarray  # (T, K)
    scope: np.ndarray  # (T, I, K)
    popularity: np.ndarray  # (T, J, K), history-based H before each slot
    rules: list[frozenset] = field(default_factory=list)
    catalog_schedule: np.ndarray = None  # type: ignore[assignment]  # (T, K, 2) update/expiry

    @property
    def horizon(self) -> int:
        return self.config.horizon_slots

    @property
    def coverage(self) -> np.ndarray:
        return self.topology.coverage_matrix()

    def channel(self, t: int) -> tuple[np.ndarray, np.ndarray, dict]:
        """Expected RSU rates (I, J), BS rates (J,), and the raw gain samples
        for slot ``t``.  Deterministic in (seed, t)."""
        cfg = self.config
        ss = np.random.SeedSequence(entropy=(cfg.seed, _CHANNEL_TAG, t))
        rng = np.random.default_rng(ss)
        cov = self.coverage
        rates = np.full((cfg.n_rsus, self.topology.n_regions), np.nan)
        samples: dict = {}
        for i, rsu in enumerate(self.topology.rsus):
            for j in np.flatnonzero(cov[i]):
                d = max(models.euclidean(rsu.location, self.topology.regions[j].center), 1.0)
                gains = sample_channel(cfg, d, rng, size=cfg.channel_samples)
                samples[(i, int(j))] = gains
                snr = gains * rsu.tx_power_w / cfg.noise_power_w
                rates[i, j] = float(np.mean(rsu.bandwidth_hz * np.log2(1.0 + snr)))
        if np.nanmin(rates) < models.RATE_FLOOR_BPS:
            raise DomainError("degenerate channel")
        with np.errstate(invalid="ignore"):
            bs_rates = cfg.bs_rate_fraction * np.nanmin(rates, axis=0)
        return rates, bs_rates, samples

    def observation(self, t: int) -> SlotObservation:
        _, _, samples = self.channel(t)
        return SlotObservation(
            slot=t,
            demand=self.demand[t],
            scope=self.scope[t],
            channel_gain_samples=samples,
            traffic_rules=self.rules[t],
        )

    def fingerprint(self) -> str:
        """Stable digest of all precomputed traces, for reproducibility checks."""
        import hashlib

        h = hashlib.sha256()
        for arr in (self.sd_sizes, self.demand, self.freshness, self.scope,
                    self.popularity, self.catalog_schedule):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()

    # --- snapshotting -----------------------------------------------------

    def to_snapshot(self, path: str | Path) -> None:
        payload = {
            "version": SNAPSHOT_VERSION,
            "config": asdict(self.config),
            "fingerprint": self.fingerprint(),
            "topology": {
                "rsus": [
                    {
                        "id": r.id,
                        "location": list(r.location),
                        "storage_bits": r.storage_bits,
                        "coverage_radius_m": r.coverage_radius_m,
                    }
                    for r in self.topology.rsus
                ],
                "regions": [
                    {"id": g.id, "center": list(g.center),
                     "covering_rsus": list(g.covering_rsus)}
                    for g in self.topology.regions
                ],
            },
        }
        path = Path(path)
        data = json.dumps(payload, indent=2).encode()
        if path.suffix == ".gz":
            path.write_bytes(gzip.compress(data))
        else:
            path.write_bytes(data)

    @staticmethod
    def from_snapshot(path: str | Path) -> "Scenario":
        path = Path(path)
        raw = path.read_bytes()
        if path.suffix == ".gz":
            raw = gzip.decompress(raw)
        payload = json.loads(raw)
        if payload.get("version") != SNAPSHOT_VERSION:
            raise DomainError(f"unsupported snapshot version {payload.get('version')}")
        scenario = generate_scenario(ScenarioConfig(**payload["config"]))
        if scenario.fingerprint() != payload["fingerprint"]:
            raise DomainError("snapshot replay mismatch: traces diverged from fingerprint")
        return scenario


def generate_scenario(cfg: ScenarioConfig) -> Scenario:
    """Materialize a scenario from config + seed."""
    master = np.random.SeedSequence(cfg.seed)
    ss_topo, ss_catalog, ss_demand = master.spawn(3)
    topology = build_topology(cfg, np.random.default_rng(ss_topo))

    rng_cat = np.random.default_rng(ss_catalog)
    rw = cfg.area_w_m / cfg.region_cols
    rh = cfg.area_h_m / cfg.region_rows
    region_sds = np.arange(cfg.n_sds).reshape(cfg.n_regions, cfg.sd_per_region)
    sds: list[SensingDatum] = []
    for j in range(cfg.n_regions):
        row, col = divmod(j, cfg.region_cols)
        for k in region_sds[j]:
            origin = (
                float(rng_cat.uniform(col * rw, (col + 1) * rw)),
                float(rng_cat.uniform(row * rh, (row + 1) * rh)),
            )
            lifespan = int(rng_cat.integers(cfg.sd_lifespan_min_slots,
                                            cfg.sd_lifespan_max_slots + 1))
            sds.append(
                SensingDatum(
                    id=int(k),
                    size_bits=int(rng_cat.integers(cfg.sd_size_bits_min,
                                                   cfg.sd_size_bits_max + 1)),
                    update_slot=0,
                    expiry_slot=lifespan,
                    origin=origin,
                    validity_radius_m=cfg.validity_radius_m,
                )
            )
    catalog = SdCatalog(sds)

    T, J, K, I = cfg.horizon_slots, cfg.n_regions, cfg.n_sds, cfg.n_rsus
    weights = ValueWeights(cfg.popularity_alpha, cfg.popularity_beta)
    history = RequestHistory(J, K)
    rng_demand = np.random.default_rng(ss_demand)

    demand = np.zeros((T, J, K), dtype=np.int64)
    fresh = np.zeros((T, K))
    scope = np.zeros((T, I, K), dtype=np.int64)
    pop = np.zeros((T, J, K))
    schedule = np.zeros((T, K, 2), dtype=np.int64)
    rules: list[frozenset] = []

    # Origins and radii never change on regeneration, so the spatial part of
    # the scope indicator is a fixed (I, K) mask; only rules vary per slot.
    in_range = np.zeros((I, K), dtype=bool)
    for i, rsu in enumerate(topology.rsus):
        for k, sd in enumerate(catalog.sds):
            in_range[i, k] = (
                models.euclidean(sd.origin, rsu.location) <= sd.validity_radius_m
            )

    for t in range(T):
        catalog.evolve(cfg, t, rng_cat)
        rule_set = _one_way_rules(cfg, topology, catalog.sds, t)
        rules.append(rule_set)
        upd = np.array([sd.update_slot for sd in catalog.sds])
        exp = np.array([sd.expiry_slot for sd in catalog.sds])
        schedule[t, :, 0] = upd
        schedule[t, :, 1] = exp
        fresh[t] = np.maximum((exp - t) / (exp - upd), 0.0)
        scope_t = in_range.astype(np.int64)
        for i, k in rule_set:
            scope_t[i, k] = 0
        scope[t] = scope_t
        pop[t] = models.popularity_matrix(history, weights)
        demand[t] = generate_demand(cfg, region_sds, rng_demand)
        history.advance(t, demand[t])

    return Scenario(
        config=cfg,
        topology=topology,
        region_sds=region_sds,
        sd_sizes=np.array([sd.size_bits for sd in catalog.sds], dtype=np.int64),
        demand=demand,
        freshness=fresh,
        scope=scope,
        popularity=pop,
        rules=rules,
        catalog_schedule=schedule,
    )
