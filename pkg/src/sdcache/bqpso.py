"""Binary quantum-behaved particle swarm solver for the per-slot problem.

Particles encode the caching matrix X; the allocation Y is derived by equal
splitting of each region's demand over the caching RSUs.  Constraint handling
is a penalty method, so every candidate has a finite fitness and feasible
candidates score exactly their drift-plus-penalty objective.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import models
from .slot import SlotInstance
from .types import DomainError


@dataclass(frozen=True)
class BqpsoConfig:
    particles: int = 100
    max_iterations: int = 100
    omega1: float = 0.5
    omega2: float = 1.0
    penalty_gamma: float | None = None  # None -> instance default
    rng_seed: int = 0
    # The reference comparison is against the population size; "dimension"
    # switches the crossover trigger to D/2.
    hamming_threshold: str = "population"

    def __post_init__(self) -> None:
        if not (self.omega2 >= self.omega1 > 0):
            raise DomainError("need omega2 >= omega1 > 0")
        if self.particles < 1 or self.max_iterations < 0:
            raise DomainError("invalid swarm size or iteration count")
        if self.hamming_threshold not in ("population", "dimension"):
            raise DomainError(f"unknown hamming threshold {self.hamming_threshold!r}")


@dataclass
class Swarm:
    positions_cont: np.ndarray  # (N, D) reals
    positions_bin: np.ndarray  # (N, D) in {0, 1}
    personal_best: np.ndarray  # (N, D) binary
    personal_best_fit: np.ndarray  # (N,)
    global_best: np.ndarray  # (D,)
    global_best_fit: float
    iteration: int = 0
    fitness_trace: list[float] = field(default_factory=list)


def allocate_y(x: np.ndarray, inst: SlotInstance) -> np.ndarray:
    """Equal split of each region's demand over the covering RSUs that cache
    the SD; the integer remainder goes to the lowest RSU indices.  Demand with
    no caching RSU falls back to the base station (y = 0)."""
    caching = inst.coverage[:, :, None] * x[:, None, :]  # (I, J, K) 0/1
    n = caching.sum(axis=0)  # (J, K)
    safe_n = np.maximum(n, 1)
    base = inst.demand // safe_n
    rem = inst.demand - base * n
    rank = np.cumsum(caching, axis=0) - caching
    y = caching * (base[None] + (rank < rem[None]))
    return np.where(n[None] > 0, y, 0).astype(np.int64)


class _FitnessContext:
    """Per-instance precomputation for batched swarm evaluation.

    All allocation work happens on the (region, SD) pairs that actually carry
    demand; at full scale that is a small fraction of the dense tensor.
    """

    def __init__(self, inst: SlotInstance, gamma: float):
        self.inst = inst
        self.gamma = gamma
        pairs = np.argwhere(inst.demand > 0)
        self.jp = pairs[:, 0]
        self.kp = pairs[:, 1]
        self.d_p = inst.demand[self.jp, self.kp]  # (P,)
        self.cov_p = inst.coverage[:, self.jp]  # (I, P)
        self.cy_p = inst.objective_y_coef[:, self.jp, self.kp]  # (I, P)
        self.sizes_p = inst.sizes[self.kp]  # (P,)
        self.region_onehot = np.zeros((len(self.jp), inst.n_regions))
        self.region_onehot[np.arange(len(self.jp)), self.jp] = 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            self.inv_rate = np.where(inst.coverage, 1.0 / inst.rsu_rates, 0.0)
        self.has_demand = inst.demand.sum(axis=1) > 0

    def allocate(self, xs: np.ndarray) -> np.ndarray:
        """Equal-split allocations on the demand pairs, shape (N, I, P)."""
        caching = self.cov_p[None] * xs[:, :, self.kp]  # (N, I, P)
        n = caching.sum(axis=1)  # (N, P)
        base = self.d_p[None] // np.maximum(n, 1)
        rem = self.d_p[None] - base * n
        rank = np.cumsum(caching, axis=1) - caching
        y = caching * (base[:, None] + (rank < rem[:, None]))
        return np.where(n[:, None] > 0, y, 0).astype(np.int64)

    def expand(self, y_p: np.ndarray) -> np.ndarray:
        """Scatter pair allocations back into dense (N, I, J, K) tensors."""
        n = y_p.shape[0]
        inst = self.inst
        y = np.zeros((n, inst.n_rsus, inst.n_regions, inst.n_sds), dtype=np.int64)
        y[:, :, self.jp, self.kp] = y_p
        return y

    def fitness(self, xs: np.ndarray) -> np.ndarray:
        inst = self.inst
        ys = self.allocate(xs)  # (N, I, P)
        obj = (
            inst.objective_const
            + np.einsum("ik,nik->n", inst.objective_x_coef, xs)
            + np.einsum("ip,nip->n", self.cy_p, ys)
        )

        used = np.einsum("k,nik->ni", inst.sizes, xs)
        c3 = np.clip(used - inst.storage[None], 0.0, None).sum(axis=1)

        loads = ys.sum(axis=2).astype(float)  # (N, I)
        qs = np.clip(
            loads - (inst.service_rates - inst.stability_margin)[None], 0.0, None
        ).sum(axis=1)
        residual = self.d_p[None] - ys.sum(axis=1)  # (N, P)
        bs_loads = residual.sum(axis=1).astype(float)
        qs = qs + np.clip(
            bs_loads - (inst.bs_service_rate - inst.stability_margin), 0.0, None
        )

        margins = np.maximum(inst.service_rates[None] - loads, inst.stability_margin)
        l_rsu = 1.0 / margins  # (N, I)
        bits = ys * self.sizes_p[None, None]  # (N, I, P)
        tx = (bits @ self.region_onehot) * self.inv_rate[None]  # (N, I, J)
        active = (ys @ self.region_onehot) > 0  # (N, I, J)
        path = np.where(
            active & inst.coverage[None], l_rsu[:, :, None] + tx, -np.inf
        )
        bs_margin = np.maximum(inst.bs_service_rate - bs_loads, inst.stability_margin)
        bs_bits = (residual * self.sizes_p[None]) @ self.region_onehot  # (N, J)
        bs_active = (residual @ self.region_onehot) > 0
        bs_path = np.where(
            bs_active, 1.0 / bs_margin[:, None] + bs_bits / inst.bs_rates[None], -np.inf
        )
        delays = np.maximum(path.max(axis=1, initial=-np.inf), bs_path)
        delays = np.where(np.isneginf(delays), 0.0, delays)
        c2 = (
            np.clip(delays - inst.delay_tolerance[None], 0.0, None)
            * self.has_demand[None]
        ).sum(axis=1)

        pen = c3 + inst.delay_slack_scale * c2 + inst.stability_slack_scale * qs
        return obj + self.gamma * pen


def _objective(x: np.ndarray, y: np.ndarray, inst: SlotInstance) -> float:
    return float(
        inst.objective_const
        + np.sum(inst.objective_x_coef * x)
        + np.sum(inst.objective_y_coef * y)
    )


def fitness(x: np.ndarray, inst: SlotInstance, gamma: float,
            y: np.ndarray | None = None) -> float:
    """Penalized objective; equals the objective exactly for feasible pairs."""
    if y is None:
        y = allocate_y(x, inst)
    report = models.validate(x, y, inst)
    pen = (
        report.total_slack(("C3", "C5"))
        + inst.delay_slack_scale * report.total_slack(("C2",))
        + inst.stability_slack_scale * report.total_slack(("QS",))
    )
    return _objective(x, y, inst) + gamma * pen


def _batch_fitness(xs: np.ndarray, inst: SlotInstance, gamma: float) -> np.ndarray:
    """Vectorized fitness for a (N, I, K) stack of caching matrices.

    Matches the scalar `fitness` because the derived allocation satisfies C4
    and C5 by construction, leaving only the C3/QS/C2 slacks to evaluate.
    """
    return _FitnessContext(inst, gamma).fitness(xs)


def local_attractor(p_n: np.ndarray, p_star: np.ndarray,
                    rng: np.random.Generator) -> np.ndarray:
    """Stochastic binary attractor between a personal and the global best."""
    if p_n.shape != p_star.shape:
        raise DomainError("attractor inputs must have equal length")
    phi = rng.random(p_n.shape)
    l_cont = phi * p_n + (1.0 - phi) * p_star
    psi = rng.random(p_n.shape)
    return (psi < 1.0 / (1.0 + np.exp(-l_cont))).astype(np.int64)


def contraction_factor(iteration: int, max_iterations: int,
                       omega1: float, omega2: float) -> float:
    """Linearly annealed contraction-expansion factor, omega2 down to omega1."""
    if not 0 <= iteration <= max_iterations:
        raise DomainError("iteration outside [0, max_iterations]")
    return omega1 + (omega2 - omega1) * (max_iterations - iteration) / max_iterations


def crossover_repair(x_n: np.ndarray, l_n: np.ndarray, rng: np.random.Generator,
                     threshold: float) -> np.ndarray:
    """Single-point crossover towards the attractor when the Hamming distance
    reaches the threshold; otherwise the position is kept."""
    if x_n.shape != l_n.shape:
        raise DomainError("crossover inputs must have equal length")
    d = x_n.shape[0]
    if int(np.sum(x_n != l_n)) < threshold or d < 2:
        return x_n
    cut = int(rng.integers(1, d))
    return np.concatenate([x_n[:cut], l_n[cut:]])


def _draw_log_term(rng: np.random.Generator, shape: tuple) -> np.ndarray:
    g = rng.random(shape)
    while np.any(g == 0.0):  # re-draw: log(1/0) diverges
        zero = g == 0.0
        g[zero] = rng.random(int(zero.sum()))
    return np.log(1.0 / g)


def position_update(swarm: Swarm, eta: float, rng: np.random.Generator,
                    threshold: float) -> np.ndarray:
    """One synchronized swarm move; returns the new binary positions.

    Mutates the continuous and binary position arrays of ``swarm`` in place;
    best-tracking stays with the caller.
    """
    if eta <= 0:
        raise DomainError("contraction factor must be positive")
    n, d = swarm.positions_bin.shape
    phi = rng.random((n, d))
    l_cont = phi * swarm.personal_best + (1.0 - phi) * swarm.global_best[None]
    log_term = _draw_log_term(rng, (n, d))
    sign = rng.integers(0, 2, (n, d)) * 2 - 1
    mean_best = swarm.personal_best.mean(axis=0)
    swarm.positions_cont = l_cont + sign * eta * np.abs(
        mean_best[None] - swarm.positions_cont
    ) * log_term
    row_mean = swarm.positions_cont.mean(axis=1, keepdims=True)
    new_bin = (swarm.positions_cont >= row_mean).astype(np.int64)

    psi = rng.random((n, d))
    attractors = (psi < 1.0 / (1.0 + np.exp(-l_cont))).astype(np.int64)
    for idx in range(n):
        new_bin[idx] = crossover_repair(new_bin[idx], attractors[idx], rng, threshold)
    swarm.positions_bin = new_bin
    return new_bin


def run(
    inst: SlotInstance,
    cfg: BqpsoConfig,
) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    """Full swarm optimization; returns (x, y, best fitness, per-iteration trace).

    Deterministic for a fixed seed.  Fitness evaluation count is exactly
    particles * (iterations + 1).
    """
    rng = np.random.default_rng(cfg.rng_seed)
    n = cfg.particles
    d = inst.n_rsus * inst.n_sds
    gamma = cfg.penalty_gamma if cfg.penalty_gamma is not None else inst.gamma
    threshold = (n if cfg.hamming_threshold == "population" else d) / 2.0
    ctx = _FitnessContext(inst, gamma)

    x_bin = rng.integers(0, 2, (n, d))
    swarm = Swarm(
        positions_cont=x_bin.astype(float),
        positions_bin=x_bin,
        personal_best=x_bin.copy(),
        personal_best_fit=ctx.fitness(x_bin.reshape(n, inst.n_rsus, inst.n_sds)),
        global_best=np.zeros(d, dtype=np.int64),
        global_best_fit=np.inf,
    )
    g = int(np.argmin(swarm.personal_best_fit))
    swarm.global_best = swarm.personal_best[g].copy()
    swarm.global_best_fit = float(swarm.personal_best_fit[g])
    swarm.fitness_trace.append(swarm.global_best_fit)

    for it in range(cfg.max_iterations):
        eta = contraction_factor(it, cfg.max_iterations, cfg.omega1, cfg.omega2)
        new_bin = position_update(swarm, eta, rng, threshold)
        fit = ctx.fitness(new_bin.reshape(n, inst.n_rsus, inst.n_sds))
        improved = fit < swarm.personal_best_fit
        swarm.personal_best[improved] = new_bin[improved]
        swarm.personal_best_fit[improved] = fit[improved]
        g = int(np.argmin(swarm.personal_best_fit))
        if swarm.personal_best_fit[g] < swarm.global_best_fit:
            swarm.global_best = swarm.personal_best[g].copy()
            swarm.global_best_fit = float(swarm.personal_best_fit[g])
        swarm.iteration = it + 1
        swarm.fitness_trace.append(swarm.global_best_fit)

    x = swarm.global_best.reshape(inst.n_rsus, inst.n_sds)
    y = allocate_y(x, inst)
    return x, y, swarm.global_best_fit, swarm.fitness_trace


def solver(cfg: BqpsoConfig):
    """Adapter with the common per-slot solver signature."""

    def solve(inst: SlotInstance) -> tuple[np.ndarray, np.ndarray]:
        x, y, _, _ = run(inst, cfg)
        return x, y

    return solve
