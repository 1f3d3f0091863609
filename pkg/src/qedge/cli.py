"""Command-line harness: generate, solve, sweep.

Exit codes: 0 success, 1 usage error, 2 problem too large for the chosen
method, 3 solver failure. All randomness flows from explicit --seed
flags. Reports are JSON, traces and sweeps are CSV; timing fields live
under a separate "timing" key so deterministic comparison can drop them.
QEDGE_THREADS caps sweep parallelism (default 1).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from .admm import AdmmConfig, run_admm, write_trace_csv
from .backends import AnnealConfig
from .errors import CapacityError, ParameterError, ParseError, QedgeError, ValidationError
from .exact import enumerate_solve
from .instance import GenConfig, generate_instance, load_instance, restrict_areas, save_instance
from .model import check_feasibility
from .qaoa import QaoaConfig
from .qubo import BudgetConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CAPACITY = 2
EXIT_SOLVER = 3

GAP_FLOOR = 1e-12


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str):
    try:
        return [int(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="qedge",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate and write a problem instance")
    gen.add_argument("--areas", type=int, required=True, help="number of demand areas (M)")
    gen.add_argument("--ens", type=int, required=True, help="number of candidate EN sites (N)")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--node-count", type=int, default=50)
    gen.add_argument("--attach-degree", type=int, default=2)
    gen.add_argument("--budget", type=float, default=20.0)
    gen.add_argument("--delay-penalty", type=float, default=1e-4)
    gen.add_argument("--unmet-penalty", type=float, default=0.1)
    gen.add_argument("-o", "--out", default="instance.json", help="output path")

    solve = sub.add_parser("solve", help="solve an instance and write a run report")
    solve.add_argument("-i", "--instance", required=True, help="instance JSON path")
    solve.add_argument("--method", choices=["exact", "admm"], required=True)
    solve.add_argument("--backend", choices=["exhaustive", "anneal", "qaoa"],
                       default="exhaustive", help="QUBO backend for --method admm")
    solve.add_argument("--baseline", choices=["exact"], default=None,
                       help="also solve exactly and report the relative gap")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--rho-admm", type=float, default=10.0)
    solve.add_argument("--max-iters", type=int, default=100)
    solve.add_argument("--qaoa-depth", type=int, default=3)
    solve.add_argument("--shots", type=int, default=1024)
    solve.add_argument("--restarts", type=int, default=5)
    solve.add_argument("--slack-bits", type=int, default=4)
    solve.add_argument("-o", "--out", default="report.json", help="report path")
    solve.add_argument("--trace", default=None,
                       help="trace CSV path (admm; default: report stem + .trace.csv)")

    sweep = sub.add_parser("sweep", help="nested area sweep over seeds and methods")
    sweep.add_argument("--areas", type=_int_list, required=True,
                       help="comma-separated area counts, e.g. 5,10,20")
    sweep.add_argument("--ens", type=int, default=3)
    sweep.add_argument("--seed", type=_int_list, required=True,
                       help="comma-separated seeds")
    sweep.add_argument("--method", type=lambda t: t.split(","), required=True,
                       help="comma-separated methods from {exact,admm}")
    sweep.add_argument("--backend", choices=["exhaustive", "anneal", "qaoa"],
                       default="exhaustive")
    sweep.add_argument("--rho-admm", type=float, default=10.0)
    sweep.add_argument("--max-iters", type=int, default=100)
    sweep.add_argument("--qaoa-depth", type=int, default=3)
    sweep.add_argument("--shots", type=int, default=1024)
    sweep.add_argument("--restarts", type=int, default=5)
    sweep.add_argument("--slack-bits", type=int, default=4)
    sweep.add_argument("-o", "--out", default="sweep.csv", help="output CSV path")
    return parser


def _admm_config(args) -> AdmmConfig:
    backend_config = None
    if args.backend == "anneal":
        backend_config = AnnealConfig()
    elif args.backend == "qaoa":
        backend_config = QaoaConfig(depth=args.qaoa_depth, shots=args.shots,
                                    restarts=args.restarts)
    return AdmmConfig(
        rho=args.rho_admm,
        max_iters=args.max_iters,
        backend=args.backend,
        backend_config=backend_config,
        budget=BudgetConfig(slack_bits=args.slack_bits),
    )


def _config_echo(args, method: str) -> dict:
    echo = {"method": method, "seed": args.seed}
    if method == "admm":
        echo.update(
            backend=args.backend,
            rho_admm=args.rho_admm,
            max_iters=args.max_iters,
            slack_bits=args.slack_bits,
        )
        if args.backend == "qaoa":
            echo.update(qaoa_depth=args.qaoa_depth, shots=args.shots, restarts=args.restarts)
    return echo


def _solve_one(instance, method: str, args, seed: int):
    """Returns (solution, iterations, converged, trace)."""
    if method == "exact":
        return enumerate_solve(instance), None, None, None
    cfg = _admm_config(args)
    solution, state = run_admm(instance, cfg, seed)
    return solution, state.iteration, state.converged, state.trace


def cmd_generate(args) -> int:
    config = GenConfig(
        m=args.areas,
        n=args.ens,
        seed=args.seed,
        node_count=args.node_count,
        attach_degree=args.attach_degree,
        budget=args.budget,
        delay_penalty=args.delay_penalty,
        unmet_penalty=args.unmet_penalty,
    )
    instance = generate_instance(config)
    save_instance(instance, args.out)
    print(
        f"wrote {args.out}: M={instance.m} N={instance.n} "
        f"total_demand={instance.demand.sum():.3f} total_capacity={instance.capacity.sum():.0f}"
    )
    return EXIT_OK


def cmd_solve(args) -> int:
    t_start = time.perf_counter()
    instance = load_instance(args.instance)
    timing = {}

    t0 = time.perf_counter()
    solution, iterations, converged, trace = _solve_one(instance, args.method, args, args.seed)
    timing["solve_s"] = time.perf_counter() - t0

    violations = check_feasibility(instance, solution)
    if violations:
        raise RuntimeError(f"solver produced an infeasible solution: {violations[0]}")

    baseline = None
    if args.baseline == "exact":
        t0 = time.perf_counter()
        exact_solution = enumerate_solve(instance)
        timing["baseline_s"] = time.perf_counter() - t0
        exact_total = exact_solution.cost.total
        gap = (solution.cost.total - exact_total) / max(exact_total, GAP_FLOOR)
        baseline = {"method": "exact", "total": exact_total, "gap": gap}

    report = {
        "instance": {
            "path": args.instance,
            "seed": instance.seed,
            "m": instance.m,
            "n": instance.n,
        },
        "config": _config_echo(args, args.method),
        "solution": solution.to_dict(),
        "baseline": baseline,
        "iterations": iterations,
        "converged": converged,
    }
    if args.method == "admm" and trace is not None:
        trace_path = args.trace or (os.path.splitext(args.out)[0] + ".trace.csv")
        write_trace_csv(trace, trace_path)
        report["trace_path"] = trace_path
    report["timing"] = {**timing, "total_s": time.perf_counter() - t_start}
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(
        f"{args.method}{'/' + args.backend if args.method == 'admm' else ''}: "
        f"total={solution.cost.total:.6f} z={''.join(str(int(v)) for v in solution.z)}"
        + (f" gap={baseline['gap']:.4%}" if baseline else "")
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.seed:
        raise ParameterError("at least one seed is required")
    if not args.areas:
        raise ParameterError("at least one area count is required")
    for method in args.method:
        if method not in ("exact", "admm"):
            raise ParameterError(f"unknown method {method!r}")
    m_max = max(args.areas)

    cells = []
    for seed in args.seed:
        base = generate_instance(GenConfig(m=m_max, n=args.ens, seed=seed))
        for m_keep in sorted(args.areas):
            sub = restrict_areas(base, m_keep)
            for method in args.method:
                cells.append((m_keep, seed, method, sub))

    def run_cell(cell):
        m_keep, seed, method, sub = cell
        t0 = time.perf_counter()
        solution, iterations, _, _ = _solve_one(sub, method, args, seed)
        elapsed = time.perf_counter() - t0
        gap = ""
        if method == "admm" and "exact" in args.method:
            exact_total = enumerate_solve(sub).cost.total
            gap = repr((solution.cost.total - exact_total) / max(exact_total, GAP_FLOOR))
        return {
            "m": m_keep,
            "seed": seed,
            "method": method,
            "backend": args.backend if method == "admm" else "",
            "total": repr(solution.cost.total),
            "gap": gap,
            "iterations": "" if iterations is None else iterations,
            "time_s": f"{elapsed:.6f}",
        }

    workers = max(1, int(os.environ.get("QEDGE_THREADS", "1")))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_cell, cells))
    else:
        rows = [run_cell(c) for c in cells]
    rows.sort(key=lambda r: (r["seed"], r["m"], r["method"]))

    fieldnames = ["m", "seed", "method", "backend", "total", "gap", "iterations", "time_s"]
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {args.out}: {len(rows)} rows")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"generate": cmd_generate, "solve": cmd_solve, "sweep": cmd_sweep}
    try:
        return handlers[args.command](args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ParameterError, ParseError, ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QedgeError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
