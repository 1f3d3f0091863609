"""Objective evaluation and constraint checking for the placement MILP.

The problem minimizes placement cost + weighted delay cost + unmet-demand
cost over a binary placement vector z, a nonnegative allocation matrix x,
and a nonnegative unmet vector u, subject to
    C1: placement_cost . z <= budget
    C2: 0 <= sum_m x[m, n] <= capacity[n] * z[n]      for each site n
    C3: sum_n x[m, n] + u[m] = demand[m]              for each area m
    C4: z binary
    C5: x, u >= 0
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import ParameterError
from .instance import ProblemInstance

DEFAULT_FEASIBILITY_TOL = 1e-9


def _check_dims(instance: ProblemInstance, z=None, x=None, u=None) -> None:
    if z is not None and np.shape(z) != (instance.n,):
        raise ParameterError(f"placement has shape {np.shape(z)}, expected ({instance.n},)")
    if x is not None and np.shape(x) != (instance.m, instance.n):
        raise ParameterError(
            f"allocation has shape {np.shape(x)}, expected ({instance.m}, {instance.n})"
        )
    if u is not None and np.shape(u) != (instance.m,):
        raise ParameterError(f"unmet vector has shape {np.shape(u)}, expected ({instance.m},)")


@dataclass(frozen=True)
class CostBreakdown:
    placement: float
    delay: float
    unmet: float
    total: float


@dataclass(frozen=True)
class Solution:
    """A placement z with its allocation (x, u) and evaluated costs."""

    z: np.ndarray
    x: np.ndarray
    u: np.ndarray
    cost: CostBreakdown

    def to_dict(self) -> dict:
        return {
            "z": [int(v) for v in self.z],
            "x": [row.tolist() for row in np.asarray(self.x, dtype=float)],
            "u": np.asarray(self.u, dtype=float).tolist(),
            "cost": {
                "placement": self.cost.placement,
                "delay": self.cost.delay,
                "unmet": self.cost.unmet,
                "total": self.cost.total,
            },
        }


@dataclass(frozen=True)
class Violation:
    constraint: str  # "C1" .. "C5"
    index: Optional[tuple]
    residual: float

    def __str__(self) -> str:
        where = "" if self.index is None else f" at {self.index}"
        return f"{self.constraint}{where}: residual {self.residual:.3g}"


def placement_cost(instance: ProblemInstance, z) -> float:
    _check_dims(instance, z=z)
    return float(np.dot(instance.placement_cost, np.asarray(z, dtype=float)))


def delay_cost(instance: ProblemInstance, x) -> float:
    _check_dims(instance, x=x)
    if instance.m == 0 or instance.n == 0:
        return 0.0
    # row-major reduction: sum over sites within each area, then over areas
    per_area = np.sum(instance.delay * np.asarray(x, dtype=float), axis=1)
    return float(instance.delay_penalty * np.sum(per_area))


def unmet_cost(instance: ProblemInstance, u) -> float:
    _check_dims(instance, u=u)
    return float(np.dot(instance.unmet_penalty, np.asarray(u, dtype=float)))


def total_objective(instance: ProblemInstance, z, x, u) -> CostBreakdown:
    """Evaluate all three cost components; total is their exact sum."""
    p = placement_cost(instance, z)
    d = delay_cost(instance, x)
    un = unmet_cost(instance, u)
    return CostBreakdown(placement=p, delay=d, unmet=un, total=p + d + un)


def make_solution(instance: ProblemInstance, z, x, u) -> Solution:
    z = np.asarray(z)  # dtype preserved so integrality checks see raw values
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    return Solution(z=z, x=x, u=u, cost=total_objective(instance, z, x, u))


def check_feasibility(
    instance: ProblemInstance, solution: Solution, tol: float = DEFAULT_FEASIBILITY_TOL
) -> List[Violation]:
    """Return one Violation per constraint breach beyond tol; empty means feasible."""
    if tol < 0:
        raise ParameterError("tol must be nonnegative")
    z = np.asarray(solution.z, dtype=float)
    x = np.asarray(solution.x, dtype=float)
    u = np.asarray(solution.u, dtype=float)
    _check_dims(instance, z=z, x=x, u=u)
    out: List[Violation] = []

    r1 = float(np.dot(instance.placement_cost, z) - instance.budget)
    if r1 > tol:
        out.append(Violation("C1", None, r1))

    load = x.sum(axis=0) if instance.m else np.zeros(instance.n)
    for n in range(instance.n):
        r2 = float(load[n] - instance.capacity[n] * z[n])
        if r2 > tol:
            out.append(Violation("C2", (n,), r2))

    served = x.sum(axis=1) if instance.n else np.zeros(instance.m)
    for m in range(instance.m):
        r3 = abs(float(served[m] + u[m] - instance.demand[m]))
        if r3 > tol:
            out.append(Violation("C3", (m,), r3))

    for n in range(instance.n):
        r4 = float(min(abs(z[n]), abs(z[n] - 1.0)))
        if r4 > tol:
            out.append(Violation("C4", (n,), r4))

    for m in range(instance.m):
        for n in range(instance.n):
            if x[m, n] < -tol:
                out.append(Violation("C5", (m, n), float(-x[m, n])))
        if u[m] < -tol:
            out.append(Violation("C5", (m,), float(-u[m])))
    return out
