"""Exact per-slot solver: big-M linearization plus branch and bound.

The per-slot problem is linear in (x, y) except for the M/M/1 sojourn terms
inside the delay constraint.  Those are linearized by a one-hot binary
expansion of every integer allocation, auxiliary sojourn variables L with a
bilinear equality, and product variables xi = chi * L enforced through the
standard four-row big-M envelope.  The resulting row system is the reference
feasibility check; the branch-and-bound search and the brute-force oracle are
two independent routes to the same optimum.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from . import models
from .slot import SlotInstance
from .types import DomainError

#: Demand cap above which the one-hot expansion is refused.
MAX_DEMAND_PER_PAIR = 50
#: Enumeration oracle caps: placement and per-placement allocation space.
ORACLE_MAX_X_SPACE = 2**20
ORACLE_MAX_Y_SPACE = 10**6


@dataclass(frozen=True)
class VarDef:
    name: str
    kind: str  # "binary" or "continuous"
    lb: float
    ub: float


@dataclass(frozen=True)
class Row:
    name: str
    coeffs: dict  # var index -> coefficient
    sense: str  # "<=" or "=="
    rhs: float

    def evaluate(self, values: np.ndarray) -> float:
        return float(sum(c * values[v] for v, c in self.coeffs.items()))


@dataclass(frozen=True)
class ExactSolution:
    x: np.ndarray
    y: np.ndarray
    objective: float
    optimal: bool
    nodes: int
    wall_time_s: float


@dataclass
class LinearizedProgram:
    """Mixed-binary row system equivalent to the per-slot problem."""

    inst: SlotInstance
    variables: list[VarDef] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    objective_const: float = 0.0
    objective: np.ndarray = field(default_factory=lambda: np.zeros(0))
    index: dict = field(default_factory=dict)  # name -> var index
    # (i, j, k) triples that carry allocation variables
    triples: list[tuple[int, int, int]] = field(default_factory=list)

    def _add_var(self, name: str, kind: str, lb: float, ub: float) -> int:
        idx = len(self.variables)
        self.variables.append(VarDef(name, kind, lb, ub))
        self.index[name] = idx
        return idx

    def n_variables(self) -> int:
        return len(self.variables)

    # --- assignment construction and verification -----------------------------

    def build_assignment(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Lift a decision pair into the full variable vector.

        The auxiliary variables are set to the values the row system forces,
        so a decision is feasible exactly when this vector satisfies all rows.
        """
        inst = self.inst
        values = np.zeros(self.n_variables())
        for i in range(inst.n_rsus):
            for k in range(inst.n_sds):
                values[self.index[f"x[{i},{k}]"]] = x[i, k]
        loads = models.rsu_load(y).astype(float)
        margins = np.maximum(inst.service_rates - loads, inst.stability_margin)
        l_rsu = 1.0 / margins
        bs_margin = max(
            inst.bs_service_rate - models.bs_load(y, inst.demand),
            inst.stability_margin,
        )
        l_bs = 1.0 / bs_margin
        for i in range(inst.n_rsus):
            if f"L[{i}]" in self.index:
                values[self.index[f"L[{i}]"]] = l_rsu[i]
        values[self.index["L0"]] = l_bs
        residual = inst.demand - y.sum(axis=0)
        for (i, j, k) in self.triples:
            theta = int(y[i, j, k])
            if theta <= int(inst.demand[j, k]):
                values[self.index[f"chi[{i},{j},{k},{theta}]"]] = 1.0
                values[self.index[f"xi[{i},{j},{k},{theta}]"]] = l_rsu[i]
        for j in range(inst.n_regions):
            for k in range(inst.n_sds):
                d = int(inst.demand[j, k])
                if d == 0:
                    continue
                theta = int(residual[j, k])
                if 0 <= theta <= d:
                    values[self.index[f"chi0[{j},{k},{theta}]"]] = 1.0
                    values[self.index[f"xi0[{j},{k},{theta}]"]] = l_bs
        for i in range(inst.n_rsus):
            for j in range(inst.n_regions):
                name = f"a[{i},{j}]"
                if name in self.index:
                    values[self.index[name]] = float(y[i, j, :].sum() > 0)
        for j in range(inst.n_regions):
            name = f"b[{j}]"
            if name in self.index:
                values[self.index[name]] = float(residual[j, :].sum() > 0)
        return values

    def check_assignment(
        self, x: np.ndarray, y: np.ndarray, tol: float = 1e-9
    ) -> tuple[bool, list[str]]:
        """Verify a decision pair against every row; returns (ok, bad rows)."""
        inst = self.inst
        violated: list[str] = []
        allowed = np.zeros((inst.n_rsus, inst.n_regions, inst.n_sds), dtype=bool)
        for t in self.triples:
            allowed[t] = True
        if np.any((y > 0) & ~allowed):
            violated.append("off-model allocation")
        if np.any(y.sum(axis=0) > inst.demand):
            violated.append("allocation exceeds demand")
        values = self.build_assignment(x, np.minimum(y, inst.demand[None]))
        if violated:
            return False, violated
        for row in self.rows:
            lhs = row.evaluate(values)
            if row.sense == "==" and abs(lhs - row.rhs) > tol:
                violated.append(row.name)
            elif row.sense == "<=" and lhs > row.rhs + tol:
                violated.append(row.name)
        for var, val in zip(self.variables, values):
            if not (var.lb - tol <= val <= var.ub + tol):
                violated.append(f"bounds:{var.name}")
        return len(violated) == 0, violated

    def evaluate_objective(self, x: np.ndarray, y: np.ndarray) -> float:
        values = self.build_assignment(x, y)
        return float(self.objective_const + self.objective @ values)

    def dump(self) -> str:
        lines = [f"variables: {self.n_variables()}  rows: {len(self.rows)}"]
        lines.append(f"objective const: {self.objective_const!r}")
        for idx, var in enumerate(self.variables):
            c = self.objective[idx]
            lines.append(
                f"var {var.name} {var.kind} in [{var.lb:g}, {var.ub:g}] obj {c:g}"
            )
        for row in self.rows:
            terms = " + ".join(
                f"{c:g}*{self.variables[v].name}" for v, c in sorted(row.coeffs.items())
            )
            lines.append(f"row {row.name}: {terms} {row.sense} {row.rhs:g}")
        return "\n".join(lines)


def linearize(inst: SlotInstance) -> LinearizedProgram:
    """Build the full row system for one slot instance."""
    if int(inst.demand.max(initial=0)) > MAX_DEMAND_PER_PAIR:
        raise DomainError("instance too large for exact solver")
    prog = LinearizedProgram(inst=inst)
    eps = inst.stability_margin
    big_l = 1.0 / eps
    demand = inst.demand.astype(int)
    region_demand = demand.sum(axis=1)

    for i in range(inst.n_rsus):
        for k in range(inst.n_sds):
            prog._add_var(f"x[{i},{k}]", "binary", 0.0, 1.0)
    for i in range(inst.n_rsus):
        prog._add_var(f"L[{i}]", "continuous", 1.0 / float(inst.service_rates[i]), big_l)
    prog._add_var("L0", "continuous", 1.0 / inst.bs_service_rate, big_l)
    for i in range(inst.n_rsus):
        for j in range(inst.n_regions):
            for k in range(inst.n_sds):
                if inst.coverage[i, j] and demand[j, k] > 0:
                    prog.triples.append((i, j, k))
                    for theta in range(demand[j, k] + 1):
                        prog._add_var(f"chi[{i},{j},{k},{theta}]", "binary", 0.0, 1.0)
                        prog._add_var(
                            f"xi[{i},{j},{k},{theta}]", "continuous", 0.0, big_l
                        )
    for j in range(inst.n_regions):
        for k in range(inst.n_sds):
            if demand[j, k] > 0:
                for theta in range(demand[j, k] + 1):
                    prog._add_var(f"chi0[{j},{k},{theta}]", "binary", 0.0, 1.0)
                    prog._add_var(f"xi0[{j},{k},{theta}]", "continuous", 0.0, big_l)
    for i in range(inst.n_rsus):
        for j in range(inst.n_regions):
            if inst.coverage[i, j] and region_demand[j] > 0:
                prog._add_var(f"a[{i},{j}]", "binary", 0.0, 1.0)
    for j in range(inst.n_regions):
        if region_demand[j] > 0:
            prog._add_var(f"b[{j}]", "binary", 0.0, 1.0)

    obj = np.zeros(prog.n_variables())
    for i in range(inst.n_rsus):
        for k in range(inst.n_sds):
            obj[prog.index[f"x[{i},{k}]"]] = inst.objective_x_coef[i, k]
    for (i, j, k) in prog.triples:
        for theta in range(1, demand[j, k] + 1):
            obj[prog.index[f"chi[{i},{j},{k},{theta}]"]] = (
                theta * inst.objective_y_coef[i, j, k]
            )
    prog.objective = obj
    prog.objective_const = inst.objective_const

    ix = prog.index

    def theta_sum(prefix: str, count: int) -> dict:
        return {ix[f"{prefix},{t}]"]: float(t) for t in range(1, count + 1)}

    # C3: storage capacity per RSU.
    for i in range(inst.n_rsus):
        coeffs = {
            ix[f"x[{i},{k}]"]: float(inst.sizes[k]) for k in range(inst.n_sds)
        }
        prog.rows.append(Row(f"C3[{i}]", coeffs, "<=", float(inst.storage[i])))

    for (i, j, k) in prog.triples:
        d = demand[j, k]
        # One-hot selection of the allocation level.
        one_hot = {ix[f"chi[{i},{j},{k},{t}]"]: 1.0 for t in range(d + 1)}
        prog.rows.append(Row(f"onehot[{i},{j},{k}]", one_hot, "==", 1.0))
        # C4: allocation requires the SD to be cached.
        coeffs = dict(theta_sum(f"chi[{i},{j},{k}", d))
        coeffs[ix[f"x[{i},{k}]"]] = coeffs.get(ix[f"x[{i},{k}]"], 0.0) - float(d)
        prog.rows.append(Row(f"C4[{i},{j},{k}]", coeffs, "<=", 0.0))

    # Residual linkage (encodes C5 through a bounded residual expansion).
    for j in range(inst.n_regions):
        for k in range(inst.n_sds):
            d = demand[j, k]
            if d == 0:
                continue
            one_hot = {ix[f"chi0[{j},{k},{t}]"]: 1.0 for t in range(d + 1)}
            prog.rows.append(Row(f"onehot0[{j},{k}]", one_hot, "==", 1.0))
            coeffs = dict(theta_sum(f"chi0[{j},{k}", d))
            for (i, jj, kk) in prog.triples:
                if jj == j and kk == k:
                    for t, c in theta_sum(f"chi[{i},{j},{k}", d).items():
                        coeffs[t] = coeffs.get(t, 0.0) + c
            prog.rows.append(Row(f"residual[{j},{k}]", coeffs, "==", float(d)))

    # Queue stability with the configured margin.
    for i in range(inst.n_rsus):
        coeffs: dict = {}
        for (ii, j, k) in prog.triples:
            if ii == i:
                coeffs.update(theta_sum(f"chi[{i},{j},{k}", demand[j, k]))
        if coeffs:
            prog.rows.append(
                Row(f"QS[{i}]", coeffs, "<=", float(inst.service_rates[i]) - eps)
            )
    coeffs = {}
    for j in range(inst.n_regions):
        for k in range(inst.n_sds):
            if demand[j, k] > 0:
                coeffs.update(theta_sum(f"chi0[{j},{k}", demand[j, k]))
    if coeffs:
        prog.rows.append(Row("QS[bs]", coeffs, "<=", inst.bs_service_rate - eps))

    # Sojourn equalities mu * L - sum(theta * xi) = 1, products via envelopes.
    for i in range(inst.n_rsus):
        coeffs = {ix[f"L[{i}]"]: float(inst.service_rates[i])}
        for (ii, j, k) in prog.triples:
            if ii == i:
                for t in range(1, demand[j, k] + 1):
                    coeffs[ix[f"xi[{i},{j},{k},{t}]"]] = -float(t)
        prog.rows.append(Row(f"sojourn[{i}]", coeffs, "==", 1.0))
    coeffs = {ix["L0"]: inst.bs_service_rate}
    for j in range(inst.n_regions):
        for k in range(inst.n_sds):
            for t in range(1, demand[j, k] + 1):
                coeffs[ix[f"xi0[{j},{k},{t}]"]] = -float(t)
    prog.rows.append(Row("sojourn[bs]", coeffs, "==", 1.0))

    def envelope(tag: str, xi_name: str, chi_name: str, l_name: str) -> None:
        xi_v, chi_v, l_v = ix[xi_name], ix[chi_name], ix[l_name]
        prog.rows.append(Row(f"env-ub[{tag}]", {xi_v: 1.0, chi_v: -big_l}, "<=", 0.0))
        prog.rows.append(Row(f"env-le[{tag}]", {xi_v: 1.0, l_v: -1.0}, "<=", 0.0))
        prog.rows.append(
            Row(f"env-ge[{tag}]", {l_v: 1.0, xi_v: -1.0, chi_v: big_l}, "<=", big_l)
        )
        prog.rows.append(Row(f"env-lb[{tag}]", {xi_v: -1.0}, "<=", 0.0))

    for (i, j, k) in prog.triples:
        for t in range(demand[j, k] + 1):
            envelope(
                f"{i},{j},{k},{t}",
                f"xi[{i},{j},{k},{t}]",
                f"chi[{i},{j},{k},{t}]",
                f"L[{i}]",
            )
    for j in range(inst.n_regions):
        for k in range(inst.n_sds):
            for t in range(demand[j, k] + 1):
                if demand[j, k] > 0:
                    envelope(
                        f"bs,{j},{k},{t}",
                        f"xi0[{j},{k},{t}]",
                        f"chi0[{j},{k},{t}]",
                        "L0",
                    )

    # Path activity indicators.
    for i in range(inst.n_rsus):
        for j in range(inst.n_regions):
            name = f"a[{i},{j}]"
            if name not in ix:
                continue
            coeffs = {}
            for (ii, jj, k) in prog.triples:
                if ii == i and jj == j:
                    coeffs.update(theta_sum(f"chi[{i},{j},{k}", demand[j, k]))
            cap = float(region_demand[j])
            up = dict(coeffs)
            up[ix[name]] = -cap
            prog.rows.append(Row(f"act-ub[{i},{j}]", up, "<=", 0.0))
            down = {v: -c for v, c in coeffs.items()}
            down[ix[name]] = 1.0
            prog.rows.append(Row(f"act-lb[{i},{j}]", down, "<=", 0.0))
    for j in range(inst.n_regions):
        name = f"b[{j}]"
        if name not in ix:
            continue
        coeffs = {}
        for k in range(inst.n_sds):
            if demand[j, k] > 0:
                coeffs.update(theta_sum(f"chi0[{j},{k}", demand[j, k]))
        cap = float(region_demand[j])
        up = dict(coeffs)
        up[ix[name]] = -cap
        prog.rows.append(Row(f"act-ub[bs,{j}]", up, "<=", 0.0))
        down = {v: -c for v, c in coeffs.items()}
        down[ix[name]] = 1.0
        prog.rows.append(Row(f"act-lb[bs,{j}]", down, "<=", 0.0))

    # C2: response latency per region, active paths only.
    for j in range(inst.n_regions):
        if region_demand[j] == 0:
            continue
        delta = float(inst.delay_tolerance[j])
        for i in range(inst.n_rsus):
            if not inst.coverage[i, j]:
                continue
            tx_max = float(
                sum(
                    inst.sizes[k] * demand[j, k] / inst.rsu_rates[i, j]
                    for k in range(inst.n_sds)
                )
            )
            big_m = max(big_l + tx_max - delta, 0.0)
            coeffs = {ix[f"L[{i}]"]: 1.0, ix[f"a[{i},{j}]"]: big_m}
            for (ii, jj, k) in prog.triples:
                if ii == i and jj == j:
                    inv = 1.0 / float(inst.rsu_rates[i, j])
                    for t in range(1, demand[j, k] + 1):
                        coeffs[ix[f"chi[{i},{j},{k},{t}]"]] = (
                            t * float(inst.sizes[k]) * inv
                        )
            prog.rows.append(Row(f"C2[{i},{j}]", coeffs, "<=", delta + big_m))
        tx_max = float(
            sum(
                inst.sizes[k] * demand[j, k] / inst.bs_rates[j]
                for k in range(inst.n_sds)
            )
        )
        big_m = max(big_l + tx_max - delta, 0.0)
        coeffs = {ix["L0"]: 1.0, ix[f"b[{j}]"]: big_m}
        inv = 1.0 / float(inst.bs_rates[j])
        for k in range(inst.n_sds):
            for t in range(1, demand[j, k] + 1):
                coeffs[ix[f"chi0[{j},{k},{t}]"]] = t * float(inst.sizes[k]) * inv
        prog.rows.append(Row(f"C2[bs,{j}]", coeffs, "<=", delta + big_m))

    return prog


# --- branch and bound -----------------------------------------------------------


def _storage_feasible_masks(sizes: np.ndarray, capacity: float) -> list[int]:
    """All SD subsets (as bitmasks) that fit within one RSU's storage."""
    k = len(sizes)
    masks = []
    for mask in range(1 << k):
        used = sum(sizes[b] for b in range(k) if mask >> b & 1)
        if used <= capacity:
            masks.append(mask)
    return masks


def _pair_allocations(
    rsus: list[int], d: int, coefs: np.ndarray
) -> list[tuple[tuple[int, ...], float]]:
    """All allocation vectors over the caching RSUs with total <= d, sorted by
    objective cost ascending (greedy-friendly enumeration order)."""
    out = []
    for combo in itertools.product(range(d + 1), repeat=len(rsus)):
        if sum(combo) <= d:
            cost = float(sum(c * coefs[idx] for idx, c in enumerate(combo)))
            out.append((combo, cost))
    out.sort(key=lambda t: t[1])
    return out


def solve_bb(prog: LinearizedProgram, time_limit_s: float = 60.0) -> ExactSolution:
    """Depth-first branch and bound over placements, then allocations.

    The placement tree enumerates storage-feasible cache rows per RSU with an
    optimistic bound that lets undecided RSUs cache for free.  Complete
    placements trigger a second search over per-(region, SD) allocation
    vectors with incremental load pruning; candidate incumbents are accepted
    only after passing the full linearized row check.
    """
    inst = prog.inst
    start = time.perf_counter()
    demand = inst.demand.astype(int)
    n_i, n_j, n_k = inst.n_rsus, inst.n_regions, inst.n_sds
    c_x = inst.objective_x_coef
    c_y = inst.objective_y_coef
    caps = inst.service_rates.astype(float) - inst.stability_margin

    row_masks = [
        _storage_feasible_masks(inst.sizes, float(inst.storage[i])) for i in range(n_i)
    ]
    pairs = [(j, k) for j in range(n_j) for k in range(n_k) if demand[j, k] > 0]
    covering = {
        (j, k): [i for i in range(n_i) if inst.coverage[i, j]] for (j, k) in pairs
    }

    best_obj = np.inf
    best_x: np.ndarray | None = None
    best_y: np.ndarray | None = None
    nodes = 0
    timed_out = False

    def pair_bound(x_rows: list[int], decided: int) -> float:
        """Optimistic allocation gain: undecided RSUs may cache anything."""
        total = 0.0
        for (j, k) in pairs:
            best = 0.0
            for i in covering[(j, k)]:
                cached = (x_rows[i] >> k & 1) if i < decided else 1
                if cached:
                    best = min(best, float(c_y[i, j, k]))
            total += demand[j, k] * best
        return total

    def search_alloc(x: np.ndarray, x_cost: float) -> None:
        nonlocal best_obj, best_x, best_y, nodes, timed_out
        alloc_tables = []
        for (j, k) in pairs:
            rsus = [i for i in covering[(j, k)] if x[i, k] == 1]
            alloc_tables.append(
                (j, k, rsus, _pair_allocations(rsus, demand[j, k], c_y[rsus, j, k]))
            )
        suffix = np.zeros(len(pairs) + 1)
        for p in range(len(pairs) - 1, -1, -1):
            table = alloc_tables[p][3]
            suffix[p] = suffix[p + 1] + (table[0][1] if table else 0.0)

        y = np.zeros((n_i, n_j, n_k), dtype=np.int64)
        loads = np.zeros(n_i)

        def recurse(p: int, cost: float) -> None:
            nonlocal best_obj, best_x, best_y, nodes, timed_out
            if timed_out or time.perf_counter() - start > time_limit_s:
                timed_out = True
                return
            nodes += 1
            if cost + suffix[p] >= best_obj - 1e-12:
                return
            if p == len(pairs):
                ok, _ = prog.check_assignment(x, y)
                if ok and cost < best_obj:
                    best_obj = cost
                    best_x = x.copy()
                    best_y = y.copy()
                return
            j, k, rsus, table = alloc_tables[p]
            for combo, delta in table:
                if any(loads[i] + c > caps[i] for i, c in zip(rsus, combo)):
                    continue
                for idx, i in enumerate(rsus):
                    y[i, j, k] = combo[idx]
                    loads[i] += combo[idx]
                recurse(p + 1, cost + delta)
                for idx, i in enumerate(rsus):
                    loads[i] -= combo[idx]
                    y[i, j, k] = 0
                if timed_out:
                    return

        recurse(0, x_cost)

    x_rows = [0] * n_i

    def search_x(i: int, x_cost: float) -> None:
        nonlocal nodes, timed_out
        if timed_out or time.perf_counter() - start > time_limit_s:
            timed_out = True
            return
        nodes += 1
        if x_cost + pair_bound(x_rows, i) >= best_obj - 1e-12:
            return
        if i == n_i:
            x = np.zeros((n_i, n_k), dtype=np.int64)
            for ii in range(n_i):
                for k in range(n_k):
                    x[ii, k] = x_rows[ii] >> k & 1
            search_alloc(x, inst.objective_const + x_cost)
            return
        for mask in row_masks[i]:
            x_rows[i] = mask
            row_cost = float(sum(c_x[i, k] for k in range(n_k) if mask >> k & 1))
            search_x(i + 1, x_cost + row_cost)
            x_rows[i] = 0
            if timed_out:
                return

    search_x(0, 0.0)

    if best_x is None:
        raise DomainError("no feasible decision found within the time limit")
    return ExactSolution(
        x=best_x,
        y=best_y,
        objective=float(best_obj),
        optimal=not timed_out,
        nodes=nodes,
        wall_time_s=time.perf_counter() - start,
    )


# --- independent oracle ---------------------------------------------------------


def enumerate_oracle(inst: SlotInstance) -> ExactSolution:
    """Brute-force optimum by full enumeration through the domain evaluators.

    Deliberately shares no code with the linearization or the tree search:
    feasibility comes from the constraint validator and objectives from the
    energy/value models, so agreement with `solve_bb` cross-checks both.
    """
    start = time.perf_counter()
    n_i, n_j, n_k = inst.n_rsus, inst.n_regions, inst.n_sds
    if 2 ** (n_i * n_k) > ORACLE_MAX_X_SPACE:
        raise DomainError("placement space too large for enumeration")
    demand = inst.demand.astype(int)
    pairs = [(j, k) for j in range(n_j) for k in range(n_k) if demand[j, k] > 0]

    best_obj = np.inf
    best_x = None
    best_y = None
    count = 0
    for bits in range(2 ** (n_i * n_k)):
        x = np.array(
            [[bits >> (i * n_k + k) & 1 for k in range(n_k)] for i in range(n_i)],
            dtype=np.int64,
        )
        if np.any((inst.sizes[None, :] * x).sum(axis=1) > inst.storage):
            continue
        per_pair = []
        space = 1
        for (j, k) in pairs:
            rsus = [i for i in range(n_i) if inst.coverage[i, j] and x[i, k] == 1]
            options = [
                combo
                for combo in itertools.product(range(demand[j, k] + 1), repeat=len(rsus))
                if sum(combo) <= demand[j, k]
            ]
            per_pair.append((j, k, rsus, options))
            space *= len(options)
        if space > ORACLE_MAX_Y_SPACE:
            raise DomainError("allocation space too large for enumeration")
        for choice in itertools.product(*(opts for _, _, _, opts in per_pair)):
            count += 1
            y = np.zeros((n_i, n_j, n_k), dtype=np.int64)
            for (j, k, rsus, _), combo in zip(per_pair, choice):
                for idx, i in enumerate(rsus):
                    y[i, j, k] = combo[idx]
            if not models.validate(x, y, inst).feasible:
                continue
            energy = models.total_energy(x, y, inst)
            value = float(np.sum(inst.value_coef * y))
            obj = inst.backlog * energy - inst.v_weight * value
            if obj < best_obj - 1e-12:
                best_obj = obj
                best_x = x.copy()
                best_y = y.copy()
    if best_x is None:
        raise DomainError("no feasible decision exists")
    return ExactSolution(
        x=best_x,
        y=best_y,
        objective=float(best_obj),
        optimal=True,
        nodes=count,
        wall_time_s=time.perf_counter() - start,
    )


def solver(time_limit_s: float = 60.0):
    """Adapter with the common per-slot solver signature."""

    def solve(inst: SlotInstance) -> tuple[np.ndarray, np.ndarray]:
        prog = linearize(inst)
        sol = solve_bb(prog, time_limit_s=time_limit_s)
        return sol.x, sol.y

    return solve
