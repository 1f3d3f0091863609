"""Hybrid placement/allocation ADMM driver.

The MILP is split on the capacity constraint in capacity-fraction units:
the continuous block carries a relaxed utilization target per EN, and
the consensus constraint ties it to the placement bit,

    sum_m x[m, n] / capacity[n] + s_n = z_n,   s_n >= 0,

where s_n is the fraction of the target left unused by the allocation.
Each iteration alternates
  1. placement block: a QUBO over the placement bits (plus budget slack
     bits) solved by the selected backend,
  2. continuous block: a convex QP in (x, u, target) with hard capacity
     sum_m x[m, n] <= capacity[n] * target_n and target_n in [0, 1],
     handed to an off-the-shelf QP solver,
  3. dual ascent on the capacity-fraction residual.

The penalty weight warms up geometrically (see AdmmConfig): while it is
small the placement block's opening threshold stays near the placement
cost scale, letting demand pressure open worthwhile sites in value
order; the large terminal weight locks the open set and drives the
consensus residuals to zero.

Iterates may be infeasible; every iteration's placement is repaired by
restore_feasibility (budget trim + exact allocation), and the returned
solution is the best restored one seen. Deterministic given seed and
backend.
"""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .alloc import solve_allocation
from .backends import solve_qubo
from .errors import CapacityError, ParameterError
from .instance import ProblemInstance
from .model import Solution, make_solution
from .qubo import BudgetConfig, build_z_subproblem_qubo

__all__ = [
    "AdmmConfig",
    "AdmmState",
    "IterationRecord",
    "QpConfig",
    "dual_update",
    "project_scaled_simplex",
    "restore_feasibility",
    "run_admm",
    "solve_continuous_block",
    "write_trace_csv",
]


@dataclass(frozen=True)
class QpConfig:
    """Inner solver settings for the continuous block."""

    max_iters: int = 200
    tol: float = 1e-8


@dataclass(frozen=True)
class AdmmConfig:
    """Driver settings.

    The penalty weight follows a geometric warm-up schedule from
    rho_initial up to rho. A small early weight keeps the placement
    block's opening threshold (h_n + rho/2 in capacity-fraction units)
    near the placement-cost scale so economically worthwhile sites can
    open; the large terminal weight makes the open set stable and drives
    the consensus residuals to zero.
    """

    rho: float = 10.0
    rho_initial: float = 0.05
    rho_growth: float = 2.0
    max_iters: int = 100
    tol_primal: float = 1e-3   # scaled by sqrt(N) at run time
    tol_dual: float = 1e-3     # scaled by sqrt(N) at run time
    backend: str = "exhaustive"
    backend_config: Optional[object] = None   # AnnealConfig or QaoaConfig
    budget: BudgetConfig = field(default_factory=BudgetConfig)
    qp: QpConfig = field(default_factory=QpConfig)

    def validate(self) -> None:
        if self.rho <= 0 or self.rho_initial <= 0:
            raise ParameterError("penalty weights must be positive")
        if self.rho_growth < 1.0:
            raise ParameterError("rho_growth must be >= 1")
        if self.tol_primal <= 0 or self.tol_dual <= 0 or self.qp.tol <= 0:
            raise ParameterError("tolerances must be positive")
        if self.max_iters < 1 or self.qp.max_iters < 1:
            raise ParameterError("iteration limits must be >= 1")

    def rho_at(self, iteration: int) -> float:
        """Penalty weight for a 1-based iteration index."""
        return float(min(self.rho, self.rho_initial * self.rho_growth ** (iteration - 1)))


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    primal_residual: float
    dual_residual: float
    restored_total: float
    z: Tuple[int, ...]
    backend_seconds: float


@dataclass
class AdmmState:
    """Iterates and the per-iteration residual trace."""

    iteration: int
    z: np.ndarray
    x: np.ndarray
    u: np.ndarray
    s: np.ndarray           # capacity-fraction slack, one per EN
    y: np.ndarray           # capacity-constraint duals, one per EN
    trace: List[IterationRecord]
    converged_at: Optional[int] = None

    @property
    def converged(self) -> bool:
        return self.converged_at is not None


def project_scaled_simplex(v, total: float) -> np.ndarray:
    """Euclidean projection of v onto {w >= 0 : sum w = total}."""
    if total < 0:
        raise ParameterError("simplex scale must be nonnegative")
    v = np.asarray(v, dtype=float)
    if total == 0:
        return np.zeros_like(v)
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u)
    ks = np.arange(1, v.size + 1)
    usable = u - (cumulative - total) / ks > 0
    k = int(ks[usable][-1])
    tau = (cumulative[k - 1] - total) / k
    return np.maximum(v - tau, 0.0)


def solve_continuous_block(
    instance: ProblemInstance,
    z,
    s_prev,
    y,
    rho: float,
    qp: QpConfig = QpConfig(),
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Minimize the augmented allocation objective for a fixed placement.

    In variables (x, u, t) with t_n the relaxed utilization target:
        delay cost + unmet cost + sum_n [ y_n (t_n - z_n) + (rho/2)(t_n - z_n)^2 ]
    subject to per-area conservation sum_n x[m, n] + u_m = demand_m,
    hard capacity sum_m x[m, n] <= capacity_n * t_n, bounds x, u >= 0 and
    0 <= t <= 1. Convex QP, solved by cvxopt; rows are re-projected onto
    their demand simplices afterwards so conservation holds to 1e-9.

    Returns (x, u, s) with s = t - utilization >= 0 the unused fraction
    of the target.
    """
    if rho <= 0:
        raise ParameterError("rho must be positive")
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    m, n = instance.m, instance.n
    cap = instance.capacity
    if m == 0 or n == 0:
        s = np.clip(z - y / rho, 0.0, 1.0) if n else np.zeros(0)
        return np.zeros((m, n)), instance.demand.copy(), s

    from cvxopt import matrix, solvers, spmatrix

    nx = m * n          # x flattened row-major: index m * n + col
    nv = nx + m + n     # then u (m), then targets (n)

    p_diag = np.zeros(nv)
    p_diag[nx + m:] = rho
    q = np.concatenate(
        [
            (instance.delay_penalty * instance.delay).ravel(),
            instance.unmet_penalty,
            y - rho * z,
        ]
    )

    # equalities: per-area conservation
    a_i, a_j, a_v = [], [], []
    for a in range(m):
        for e in range(n):
            a_i.append(a)
            a_j.append(a * n + e)
            a_v.append(1.0)
        a_i.append(a)
        a_j.append(nx + a)
        a_v.append(1.0)
    a_mat = spmatrix(a_v, a_i, a_j, (m, nv))
    b_vec = matrix(instance.demand)

    # inequalities: -x <= 0, -u <= 0, column load <= cap * target, 0 <= t <= 1
    g_i, g_j, g_v, h_vals = [], [], [], []
    row = 0
    for idx in range(nx + m):
        g_i.append(row)
        g_j.append(idx)
        g_v.append(-1.0)
        h_vals.append(0.0)
        row += 1
    for e in range(n):
        for a in range(m):
            g_i.append(row)
            g_j.append(a * n + e)
            g_v.append(1.0)
        g_i.append(row)
        g_j.append(nx + m + e)
        g_v.append(-float(cap[e]))
        h_vals.append(0.0)
        row += 1
    for e in range(n):
        g_i.append(row)
        g_j.append(nx + m + e)
        g_v.append(-1.0)
        h_vals.append(0.0)
        row += 1
        g_i.append(row)
        g_j.append(nx + m + e)
        g_v.append(1.0)
        h_vals.append(1.0)
        row += 1
    g_mat = spmatrix(g_v, g_i, g_j, (row, nv))
    h_vec = matrix(h_vals)

    p_mat = spmatrix(p_diag[p_diag > 0].tolist(),
                     np.flatnonzero(p_diag).tolist(),
                     np.flatnonzero(p_diag).tolist(), (nv, nv))
    options = {
        "show_progress": False,
        "maxiters": qp.max_iters,
        "abstol": qp.tol,
        "reltol": qp.tol,
        "feastol": max(qp.tol, 1e-10),
    }
    sol = solvers.qp(p_mat, matrix(q), g_mat, h_vec, a_mat, b_vec, options=options)
    w = np.asarray(sol["x"]).ravel()

    x = np.maximum(w[:nx].reshape(m, n), 0.0)
    u = np.maximum(w[nx : nx + m], 0.0)
    target = np.clip(w[nx + m :], 0.0, 1.0)
    # exact per-area conservation
    for a in range(m):
        polished = project_scaled_simplex(
            np.concatenate([x[a], [u[a]]]), float(instance.demand[a])
        )
        x[a] = polished[:n]
        u[a] = polished[n]
    s = np.maximum(0.0, target - x.sum(axis=0) / cap)
    return x, u, s


def dual_update(state: AdmmState, instance: ProblemInstance, rho: float) -> np.ndarray:
    """y <- y + rho * (utilization + slack - z), in capacity-fraction units."""
    util = state.x.sum(axis=0) / instance.capacity if instance.m else np.zeros(instance.n)
    return state.y + rho * (util + state.s - state.z)


def _polish_placement(instance: ProblemInstance, solution: Solution) -> Solution:
    """Greedy single-flip descent on the placement; never worsens the total.

    Rounds out the consensus loop: once the penalty weight is large, a
    marginally worthless open site stays locked open, and this closes it
    (or opens an overlooked one) whenever the exact re-allocation says
    the flip pays for itself. Deterministic: best strict improvement per
    round, ties to the lowest site index.
    """
    best = solution
    h = instance.placement_cost
    improved = True
    while improved:
        improved = False
        candidate = None
        for site in range(instance.n):
            z_alt = best.z.copy()
            z_alt[site] = 1 - z_alt[site]
            if float(np.dot(h, z_alt)) > instance.budget:
                continue
            res = solve_allocation(instance, z_alt)
            alt = make_solution(instance, z_alt, res.x, res.u)
            if alt.cost.total < best.cost.total - 1e-12 and (
                candidate is None or alt.cost.total < candidate.cost.total - 1e-12
            ):
                candidate = alt
        if candidate is not None:
            best = candidate
            improved = True
    return best


def restore_feasibility(instance: ProblemInstance, placement) -> Solution:
    """Repair a placement to a fully feasible solution.

    Closes open ENs most-expensive-first until the budget holds, then
    solves the allocation exactly for the surviving open set.
    """
    z = np.asarray(placement).astype(np.int8).copy()
    if z.shape != (instance.n,) or not np.all((z == 0) | (z == 1)):
        raise ParameterError("placement must be a binary vector of length n")
    h = instance.placement_cost
    order = sorted(range(instance.n), key=lambda i: (-h[i], i))
    k = 0
    while float(np.dot(h, z)) > instance.budget and k < instance.n:
        idx = order[k]
        z[idx] = 0
        k += 1
    res = solve_allocation(instance, z)
    return make_solution(instance, z, res.x, res.u)


def run_admm(
    instance: ProblemInstance, config: AdmmConfig = AdmmConfig(), seed: int = 0
) -> Tuple[Solution, AdmmState]:
    """Run the full hybrid loop; returns the best restored solution and the trace."""
    config.validate()
    m, n = instance.m, instance.n
    sqrt_n = np.sqrt(max(n, 1))

    x = np.zeros((m, n))
    u = instance.demand.copy()
    s = np.zeros(n)
    y = np.zeros(n)
    z_prev = np.zeros(n, dtype=np.int8)

    state = AdmmState(iteration=0, z=z_prev, x=x, u=u, s=s, y=y, trace=[])
    best: Optional[Solution] = None

    for k in range(1, config.max_iters + 1):
        rho = config.rho_at(k)
        qubo = build_z_subproblem_qubo(instance, x, s, y, rho, config.budget)
        backend_t0 = time.perf_counter()
        iter_seed = int(np.random.SeedSequence(seed, spawn_key=(k,)).generate_state(1)[0])
        try:
            result = solve_qubo(qubo, config.backend, config.backend_config, iter_seed)
        except CapacityError as exc:
            raise CapacityError(f"iteration {k}: {exc}") from exc
        backend_seconds = time.perf_counter() - backend_t0
        z = np.array(result.best_bitstring[:n], dtype=np.int8)

        x, u, s = solve_continuous_block(instance, z, s, y, rho, config.qp)

        util = x.sum(axis=0) / instance.capacity if m else np.zeros(n)
        primal = float(np.linalg.norm(util + s - z))
        dual = float(rho * np.linalg.norm(z.astype(float) - z_prev.astype(float)))

        state = AdmmState(iteration=k, z=z, x=x, u=u, s=s, y=y, trace=state.trace)
        y = dual_update(state, instance, rho)
        state.y = y

        restored = restore_feasibility(instance, z)
        if best is None or restored.cost.total < best.cost.total:
            best = restored

        state.trace.append(
            IterationRecord(
                iteration=k,
                primal_residual=primal,
                dual_residual=dual,
                restored_total=restored.cost.total,
                z=tuple(int(v) for v in z),
                backend_seconds=backend_seconds,
            )
        )
        z_prev = z
        if primal < config.tol_primal * sqrt_n and dual < config.tol_dual * sqrt_n:
            state.converged_at = k
            break
    return _polish_placement(instance, best), state


def write_trace_csv(trace: List[IterationRecord], sink) -> None:
    """Trace CSV: iter, primal_residual, dual_residual, restored_total, z_bits, backend_time_s."""
    rows = [
        {
            "iter": r.iteration,
            "primal_residual": repr(r.primal_residual),
            "dual_residual": repr(r.dual_residual),
            "restored_total": repr(r.restored_total),
            "z_bits": "".join(str(b) for b in r.z),
            "backend_time_s": f"{r.backend_seconds:.6f}",
        }
        for r in trace
    ]
    fieldnames = ["iter", "primal_residual", "dual_residual", "restored_total",
                  "z_bits", "backend_time_s"]

    def _write(fh):
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)

    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", newline="", encoding="utf-8") as fh:
            _write(fh)
    else:
        _write(sink)
