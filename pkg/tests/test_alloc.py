import dataclasses

import numpy as np
import pytest

from qedge.alloc import allocation_certificate_gap, solve_allocation
from qedge.errors import ParameterError
from qedge.model import check_feasibility, make_solution

from conftest import random_small_instance
from oracles import best_integer_allocation

CERT_TOL = 1e-9


def test_all_closed_drops_everything(toy1):
    res = solve_allocation(toy1, [0, 0])
    assert np.all(res.x == 0)
    assert np.array_equal(res.u, toy1.demand)
    assert res.objective == pytest.approx(8.0)


def test_toy1_second_site_only(toy1):
    res = solve_allocation(toy1, [0, 1])
    assert res.x == pytest.approx(np.array([[0.0, 3.0], [0.0, 5.0]]))
    assert res.u == pytest.approx(np.zeros(2))
    assert res.objective == pytest.approx(0.17)


def test_toy1_first_site_only(toy1):
    res = solve_allocation(toy1, [1, 0])
    assert res.x == pytest.approx(np.array([[3.0, 0.0], [1.0, 0.0]]))
    assert res.u == pytest.approx(np.array([0.0, 4.0]))
    assert res.objective == pytest.approx(4.05)


def test_non_binary_placement_rejected(toy1):
    with pytest.raises(ParameterError):
        solve_allocation(toy1, [0.5, 1.0])


def test_conservation_and_capacity_invariants():
    rng = np.random.default_rng(31)
    for _ in range(50):
        inst = random_small_instance(rng)
        z = rng.integers(0, 2, size=inst.n)
        res = solve_allocation(inst, z)
        served = res.x.sum(axis=1)
        assert np.allclose(served + res.u, inst.demand, atol=1e-12 * max(1, inst.demand.sum()))
        assert np.all(res.x.sum(axis=0) <= inst.capacity * z + 1e-12)
        assert np.all(res.x >= 0) and np.all(res.u >= 0)


def test_certificate_zero_on_solver_output():
    rng = np.random.default_rng(32)
    for _ in range(60):
        inst = random_small_instance(rng)
        z = rng.integers(0, 2, size=inst.n)
        res = solve_allocation(inst, z)
        gap = allocation_certificate_gap(inst, z, res.x, res.u, res.duals)
        assert gap <= CERT_TOL


def test_certificate_flags_suboptimal_reallocation(toy1):
    res = solve_allocation(toy1, [0, 1])
    # force area 0 to drop instead of using the open site
    x = res.x.copy()
    x[0, 1] = 0.0
    u = res.u.copy()
    u[0] = 3.0
    gap = allocation_certificate_gap(toy1, [0, 1], x, u, res.duals)
    assert gap > 1e-3


def test_certificate_rejects_infeasible(toy1):
    res = solve_allocation(toy1, [0, 1])
    with pytest.raises(ParameterError):
        allocation_certificate_gap(toy1, [0, 1], res.x, res.u * 0 + 1.0, res.duals)


def test_zero_demand_certificate():
    rng = np.random.default_rng(33)
    inst = random_small_instance(rng, m=2, n=2)
    inst = dataclasses.replace(inst, demand=np.zeros(2))
    res = solve_allocation(inst, [1, 1])
    assert res.objective == 0.0
    assert allocation_certificate_gap(inst, [1, 1], res.x, res.u, res.duals) == 0.0


def test_matches_integer_brute_force():
    rng = np.random.default_rng(34)
    for _ in range(25):
        inst = random_small_instance(rng, integer=True)
        z = rng.integers(0, 2, size=inst.n)
        res = solve_allocation(inst, z)
        ref = best_integer_allocation(inst, z)
        assert res.objective == pytest.approx(ref, abs=1e-6)


def test_opening_site_never_hurts():
    rng = np.random.default_rng(35)
    for _ in range(30):
        inst = random_small_instance(rng)
        z = rng.integers(0, 2, size=inst.n)
        base = solve_allocation(inst, z).objective
        closed = [n for n in range(inst.n) if z[n] == 0]
        if not closed:
            continue
        z2 = z.copy()
        z2[closed[0]] = 1
        assert solve_allocation(inst, z2).objective <= base + 1e-9


def test_output_feasible_as_solution():
    rng = np.random.default_rng(36)
    inst = random_small_instance(rng)
    z = np.ones(inst.n, dtype=np.int8)
    res = solve_allocation(inst, z)
    sol = make_solution(inst, z, res.x, res.u)
    assert [v for v in check_feasibility(inst, sol) if v.constraint != "C1"] == []
