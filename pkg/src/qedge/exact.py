"""Ground-truth solver: enumerate every budget-feasible placement.

For each candidate placement the allocation subproblem is solved exactly,
so the returned solution is a global optimum of the full MILP. Intended
for small N; larger instances should use the ADMM heuristic.
"""

from __future__ import annotations

import numpy as np

from .alloc import solve_allocation
from .errors import CapacityError
from .instance import ProblemInstance
from .model import Solution, make_solution

DEFAULT_MAX_N = 20


def enumerate_solve(instance: ProblemInstance, max_n_limit: int = DEFAULT_MAX_N) -> Solution:
    """Global optimum by enumeration over placements within budget.

    Ties on total cost are broken toward fewer open ENs, then the
    lexicographically smallest placement vector.
    """
    if instance.n > max_n_limit:
        raise CapacityError(
            f"N = {instance.n} exceeds the enumeration limit {max_n_limit}; "
            "use the ADMM solver for instances this large"
        )
    h = instance.placement_cost
    best = None
    best_key = None
    # Gray-code order: consecutive candidates differ in one bit
    for i in range(1 << instance.n):
        code = i ^ (i >> 1)
        z = np.array([(code >> n) & 1 for n in range(instance.n)], dtype=np.int8)
        cost_z = float(np.dot(h, z))
        if cost_z > instance.budget:
            continue
        res = solve_allocation(instance, z)
        total = cost_z + res.objective
        key = (total, int(z.sum()), tuple(z))
        if best_key is None or key < best_key:
            best_key = key
            best = (z, res)
    if best is None:
        # no affordable placement at all (budget below the cheapest EN)
        z = np.zeros(instance.n, dtype=np.int8)
        res = solve_allocation(instance, z)
        best = (z, res)
    z, res = best
    return make_solution(instance, z, res.x, res.u)
