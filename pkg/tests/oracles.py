"""Independent brute-force references used to validate the solvers.

Deliberately naive: these share no code paths with the implementations
they check.
"""

import itertools
from functools import lru_cache

import numpy as np


def qubo_energy_reference(qubo, bits) -> float:
    """Second evaluator: dense symmetric matrix form b^T Q b + offset."""
    n = qubo.num_vars
    full = np.zeros((n, n))
    for (i, j), v in qubo.coeffs.items():
        if i == j:
            full[i, i] += v
        else:
            full[i, j] += v / 2.0
            full[j, i] += v / 2.0
    b = np.asarray(bits, dtype=float)
    return float(qubo.offset + b @ full @ b)


def qubo_minimum_reference(qubo):
    """(best_bits, best_energy) by direct iteration over all bitstrings."""
    best_bits, best_e = None, np.inf
    for bits in itertools.product((0, 1), repeat=qubo.num_vars):
        e = qubo_energy_reference(qubo, bits)
        if e < best_e - 1e-15:
            best_e = e
            best_bits = bits
    return best_bits, best_e


def dense_expectation_reference(state, energies) -> float:
    """<psi| H |psi> with H materialized as a dense diagonal matrix."""
    h_mat = np.diag(energies.astype(complex))
    return float(np.real(np.conj(state) @ h_mat @ state))


def best_integer_allocation(instance, z) -> float:
    """Exhaustive minimum of delay + unmet cost over integer allocations.

    Searches every way of splitting each area's (integer) demand across
    the open ENs and the drop option, pruning only through memoization on
    (area index, remaining integer capacities). Requires integer demand
    and capacity.
    """
    open_sites = [n for n in range(instance.n) if z[n]]
    caps0 = tuple(int(instance.capacity[n]) for n in open_sites)
    demands = [int(d) for d in instance.demand]
    beta = instance.delay_penalty

    def area_options(m):
        lam = demands[m]
        k = len(open_sites)
        options = []
        for split in itertools.product(range(lam + 1), repeat=k):
            served = sum(split)
            if served > lam:
                continue
            cost = sum(
                beta * instance.delay[m, open_sites[i]] * split[i] for i in range(k)
            ) + instance.unmet_penalty[m] * (lam - served)
            options.append((split, cost))
        return options

    per_area = [area_options(m) for m in range(instance.m)]

    @lru_cache(maxsize=None)
    def solve(m, caps):
        if m == instance.m:
            return 0.0
        best = np.inf
        for split, cost in per_area[m]:
            if all(split[i] <= caps[i] for i in range(len(caps))):
                rest = solve(m + 1, tuple(caps[i] - split[i] for i in range(len(caps))))
                best = min(best, cost + rest)
        return best

    result = solve(0, caps0)
    solve.cache_clear()
    return float(result)


def brute_force_milp(instance):
    """(z, total) minimizing placement + best integer allocation cost."""
    best_total, best_z = np.inf, None
    for z in itertools.product((0, 1), repeat=instance.n):
        pc = float(np.dot(instance.placement_cost, z))
        if pc > instance.budget:
            continue
        total = pc + best_integer_allocation(instance, z)
        if total < best_total - 1e-15:
            best_total = total
            best_z = z
    return best_z, best_total
