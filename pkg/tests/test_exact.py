import dataclasses

import numpy as np
import pytest

from qedge.alloc import solve_allocation
from qedge.errors import CapacityError
from qedge.exact import enumerate_solve
from qedge.instance import GenConfig, ProblemInstance, generate_instance, restrict_areas
from qedge.model import check_feasibility, make_solution

from conftest import random_small_instance
from oracles import brute_force_milp


def test_toy1_optimum(toy1):
    sol = enumerate_solve(toy1)
    assert sol.z.tolist() == [0, 1]
    assert sol.cost.total == pytest.approx(0.67)


def test_zero_demand_opens_nothing(toy1):
    inst = dataclasses.replace(toy1, demand=np.zeros(2))
    sol = enumerate_solve(inst)
    assert sol.z.tolist() == [0, 0]
    assert sol.cost.total == 0.0


def test_unaffordable_budget_drops_all(toy1):
    inst = dataclasses.replace(toy1, budget=0.2)
    sol = enumerate_solve(inst)
    assert sol.z.tolist() == [0, 0]
    assert sol.cost.total == pytest.approx(float(np.dot(toy1.unmet_penalty, toy1.demand)))


def test_size_limit():
    rng = np.random.default_rng(0)
    inst = random_small_instance(rng, m=2, n=3)
    with pytest.raises(CapacityError, match="ADMM"):
        enumerate_solve(inst, max_n_limit=2)


def test_tie_break_prefers_fewer_sites():
    # two free, identical sites: opening either serves everything at equal cost
    inst = ProblemInstance(
        m=1, n=2,
        demand=np.array([2.0]),
        capacity=np.array([4.0, 4.0]),
        placement_cost=np.array([0.0, 0.0]),
        budget=1.0,
        delay_penalty=0.0,
        unmet_penalty=np.array([1.0]),
        delay=np.array([[1.0, 1.0]]),
    )
    sol = enumerate_solve(inst)
    assert sol.z.sum() == 1
    assert sol.z.tolist() == [0, 1]  # lexicographically smallest singleton


def test_output_always_feasible():
    rng = np.random.default_rng(41)
    for _ in range(20):
        inst = random_small_instance(rng)
        sol = enumerate_solve(inst)
        assert check_feasibility(inst, sol, tol=1e-9) == []


def test_never_beaten_by_feasible_candidate():
    rng = np.random.default_rng(42)
    for _ in range(20):
        inst = random_small_instance(rng)
        best = enumerate_solve(inst).cost.total
        z = rng.integers(0, 2, size=inst.n)
        if float(np.dot(inst.placement_cost, z)) > inst.budget:
            continue
        res = solve_allocation(inst, z)
        other = make_solution(inst, z, res.x, res.u)
        assert best <= other.cost.total + 1e-9


def test_matches_integer_brute_force():
    rng = np.random.default_rng(43)
    for _ in range(15):
        inst = random_small_instance(rng, integer=True)
        sol = enumerate_solve(inst)
        _, ref_total = brute_force_milp(inst)
        assert sol.cost.total == pytest.approx(ref_total, abs=1e-6)


def test_total_non_decreasing_in_area_count():
    inst = generate_instance(GenConfig(m=12, n=3, seed=5))
    totals = [
        enumerate_solve(restrict_areas(inst, k)).cost.total for k in (2, 4, 6, 8, 10, 12)
    ]
    assert all(a <= b + 1e-9 for a, b in zip(totals, totals[1:]))
