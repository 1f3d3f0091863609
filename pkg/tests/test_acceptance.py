"""Acceptance suite: one test per release criterion.

Each test prints a single PASS/FAIL line (visible with pytest -s) and
asserts the criterion at its stated tolerance. Scales and thresholds are
pinned here; nothing is deferred to later calibration.

Run: pytest tests/test_acceptance.py -v -s
"""

import itertools
import json
import time

import numpy as np
import pytest

from qedge.admm import AdmmConfig, run_admm
from qedge.alloc import allocation_certificate_gap, solve_allocation
from qedge.backends import solve_anneal, solve_exhaustive
from qedge.cli import main as cli_main
from qedge.exact import enumerate_solve
from qedge.instance import GenConfig, generate_instance, restrict_areas, save_instance
from qedge.model import check_feasibility
from qedge.qaoa import (
    QaoaConfig,
    QaoaParams,
    init_uniform_state,
    evaluate_expectation,
    run_circuit,
    solve_qaoa,
)
from qedge.qubo import Qubo, encode_budget_penalty, qubo_eval

from conftest import random_small_instance
from oracles import brute_force_milp, dense_expectation_reference

GAP_FLOOR = 1e-12

# (N=3, M=50) needs 53 distinct topology nodes; everything else is the
# standard setup
PAPER_SCENARIOS = ((5, 50), (50, 53))


def _report(num, ok, detail):
    print(f"\nACCEPTANCE {num:02d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_criterion_01_oracle_cross_validation():
    """enumerate_solve matches brute force over placements x integer allocations."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(1001)
    worst = 0.0
    for _ in range(100):
        inst = random_small_instance(rng, integer=True)
        sol = enumerate_solve(inst)
        _, ref_total = brute_force_milp(inst)
        worst = max(worst, abs(sol.cost.total - ref_total))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 60.0
    _report(1, ok, f"100 instances, max |total - brute force| = {worst:.2e}, {elapsed:.1f}s")


def test_criterion_02_allocation_certificates():
    rng = np.random.default_rng(1002)
    worst = 0.0
    for _ in range(200):
        inst = random_small_instance(rng)
        z = rng.integers(0, 2, size=inst.n)
        res = solve_allocation(inst, z)
        worst = max(worst, allocation_certificate_gap(inst, z, res.x, res.u, res.duals))
    ok = worst <= 1e-9
    _report(2, ok, f"200 (instance, placement) pairs, max certificate gap = {worst:.2e}")


def _paper_scale_runs():
    runs = {}
    for m, nodes in PAPER_SCENARIOS:
        rows = []
        for seed in range(10):
            inst = generate_instance(GenConfig(m=m, n=3, seed=seed, node_count=nodes))
            exact = enumerate_solve(inst)
            sol, state = run_admm(inst, AdmmConfig(), seed=seed)
            gap = (sol.cost.total - exact.cost.total) / max(exact.cost.total, GAP_FLOOR)
            rows.append(
                {
                    "match": bool(np.array_equal(sol.z, exact.z)),
                    "gap": gap,
                    "converged_at": state.converged_at,
                }
            )
        runs[m] = rows
    return runs


@pytest.fixture(scope="module")
def paper_runs():
    return _paper_scale_runs()


def test_criterion_03_placement_agreement(paper_runs):
    details = []
    ok = True
    for m, rows in paper_runs.items():
        matches = sum(r["match"] for r in rows)
        median_gap = float(np.median([r["gap"] for r in rows]))
        ok &= matches >= 8 and median_gap <= 0.05
        details.append(f"M={m}: {matches}/10 placements match, median gap {median_gap:.2%}")
    _report(3, ok, "; ".join(details))


def test_criterion_04_convergence_within_50(paper_runs):
    details = []
    ok = True
    for m, rows in paper_runs.items():
        converged = sum(
            r["converged_at"] is not None and r["converged_at"] <= 50 for r in rows
        )
        ok &= converged >= 9
        details.append(f"M={m}: {converged}/10 seeds converged within 50 iterations")
    _report(4, ok, "; ".join(details))


def test_criterion_05_cost_monotone_in_areas():
    counts = (5, 10, 20, 30, 40, 50)
    ok = True
    for seed in range(3):
        base = generate_instance(GenConfig(m=50, n=3, seed=seed, node_count=53))
        totals = [
            enumerate_solve(restrict_areas(base, k)).cost.total for k in counts
        ]
        ok &= all(a <= b + 1e-9 for a, b in zip(totals, totals[1:]))
    _report(5, ok, f"exact totals non-decreasing over M={counts} on 3 seeds (hard assertion)")


def test_criterion_06_qaoa_numerical_correctness():
    rng = np.random.default_rng(1006)
    worst_norm = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 11))
        p = int(rng.integers(1, 6))
        energies = rng.normal(size=1 << n)
        params = QaoaParams(
            tuple(rng.uniform(-np.pi, np.pi, p)), tuple(rng.uniform(-np.pi, np.pi, p))
        )
        state = run_circuit(energies, params)
        worst_norm = max(worst_norm, abs(float(np.linalg.norm(state)) - 1.0))

    worst_exp = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 7))
        state = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        state /= np.linalg.norm(state)
        energies = rng.normal(size=1 << n)
        worst_exp = max(
            worst_exp,
            abs(evaluate_expectation(state, energies)
                - dense_expectation_reference(state, energies)),
        )

    worst_zero = 0.0
    for n in (1, 4, 8):
        energies = rng.normal(size=1 << n)
        state = run_circuit(energies, QaoaParams((0.0,) * 3, (0.0,) * 3))
        worst_zero = max(worst_zero, float(np.max(np.abs(state - init_uniform_state(n)))))

    ok = worst_norm <= 1e-10 and worst_exp <= 1e-10 and worst_zero <= 1e-12
    _report(
        6, ok,
        f"norm drift {worst_norm:.2e} (<=1e-10), expectation vs dense oracle "
        f"{worst_exp:.2e} (<=1e-10), zero-angle state error {worst_zero:.2e} (<=1e-12)",
    )


def test_criterion_07_qaoa_solution_quality():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1007)
    baseline_rng = np.random.default_rng(2007)
    hits = 0
    never_below = True
    beats_random = True
    for trial in range(100):
        q = Qubo(num_vars=4)
        for i in range(4):
            for j in range(i, 4):
                q.add(i, j, float(rng.uniform(-1, 1)))
        exact = solve_exhaustive(q)
        res = solve_qaoa(q, QaoaConfig(depth=3, shots=1024, restarts=5), seed=trial)
        hits += abs(res.best_energy - exact.best_energy) <= 1e-9
        never_below &= res.best_energy >= exact.best_energy - 1e-9
        uniform_best = min(
            qubo_eval(q, bits)
            for bits in baseline_rng.integers(0, 2, size=(1024, 4)).tolist()
        )
        beats_random &= res.best_energy <= uniform_best + 1e-12
    elapsed = time.perf_counter() - t0
    ok = hits >= 70 and never_below and beats_random and elapsed < 300.0
    _report(
        7, ok,
        f"{hits}/100 optima (>=70), never below exhaustive: {never_below}, "
        f"<= best of 1024 random strings: {beats_random}, {elapsed:.0f}s (<300s)",
    )


def test_criterion_08_budget_penalty_soundness():
    rng = np.random.default_rng(1008)
    mu = 4.0
    ok = True
    for n, k in itertools.product(range(1, 5), range(1, 5)):
        h = rng.uniform(0.1, 1.0, size=n)
        budget = float(rng.uniform(0.3, h.sum() + 0.3))
        delta = budget / (2**k - 1)
        q = encode_budget_penalty(h, budget, mu, k)
        for z in itertools.product((0, 1), repeat=n):
            best = min(
                qubo_eval(q, list(z) + list(w))
                for w in itertools.product((0, 1), repeat=k)
            )
            violation = float(np.dot(h, z)) - budget
            if violation <= 0:
                ok &= best <= mu * delta**2 / 4 + 1e-12
            elif violation > delta:
                ok &= best >= mu * (violation - delta / 2) ** 2 - 1e-12
    _report(8, ok, "all N<=4, K<=4 configurations satisfy both penalty bounds (exhaustive)")


def test_criterion_09_annealing_baseline():
    rng = np.random.default_rng(1009)
    hits = 0
    for trial in range(100):
        q = Qubo(num_vars=8)
        for i in range(8):
            for j in range(i, 8):
                if rng.random() < 0.7:
                    q.add(i, j, float(rng.uniform(-1, 1)))
        res = solve_anneal(q, seed=trial)
        exact = solve_exhaustive(q)
        hits += abs(res.best_energy - exact.best_energy) <= 1e-9
    ok = hits >= 95
    _report(9, ok, f"simulated annealing matched the exhaustive optimum on {hits}/100 (>=95)")


def test_criterion_10_end_to_end_qaoa_pipeline(tmp_path):
    within_gap = 0
    worst_time = 0.0
    feasible = True
    for seed in range(10):
        inst_path = tmp_path / f"inst{seed}.json"
        report_path = tmp_path / f"report{seed}.json"
        save_instance(generate_instance(GenConfig(m=5, n=3, seed=seed)), inst_path)
        t0 = time.perf_counter()
        code = cli_main([
            "solve", "-i", str(inst_path), "--method", "admm", "--backend", "qaoa",
            "--slack-bits", "4", "--baseline", "exact", "--seed", str(seed),
            "-o", str(report_path), "--trace", str(tmp_path / f"t{seed}.csv"),
        ])
        worst_time = max(worst_time, time.perf_counter() - t0)
        assert code == 0
        report = json.loads(report_path.read_text())
        within_gap += report["baseline"]["gap"] <= 0.10
        sol = report["solution"]
        inst = generate_instance(GenConfig(m=5, n=3, seed=seed))
        from qedge.model import make_solution

        rebuilt = make_solution(inst, np.array(sol["z"]), np.array(sol["x"]), np.array(sol["u"]))
        feasible &= check_feasibility(inst, rebuilt, tol=1e-6) == []
    ok = within_gap >= 7 and worst_time < 120.0 and feasible
    _report(
        10, ok,
        f"7-qubit pipeline: gap <= 10% on {within_gap}/10 seeds (>=7), slowest run "
        f"{worst_time:.1f}s (<120s), all solutions feasible: {feasible}",
    )


def test_criterion_11_report_determinism(tmp_path):
    inst_path = tmp_path / "inst.json"
    save_instance(generate_instance(GenConfig(m=5, n=3, seed=3)), inst_path)
    captures = []
    for _ in range(2):
        report_path = tmp_path / "report.json"
        code = cli_main([
            "solve", "-i", str(inst_path), "--method", "admm", "--backend", "anneal",
            "--baseline", "exact", "--seed", "3", "-o", str(report_path),
            "--trace", str(tmp_path / "trace.csv"),
        ])
        assert code == 0
        doc = json.loads(report_path.read_text())
        doc.pop("timing")
        trace_rows = "\n".join(
            ",".join(line.split(",")[:5])
            for line in (tmp_path / "trace.csv").read_text().splitlines()
        )
        captures.append(json.dumps(doc, sort_keys=True) + trace_rows)
    ok = captures[0] == captures[1]
    _report(11, ok, "identical flags reproduce byte-identical reports (timing excluded)")
