"""Edge node placement and workload allocation toolkit.

Exact enumeration oracle and a hybrid ADMM heuristic whose placement
block is a QUBO solved by exhaustive search, simulated annealing, or a
statevector QAOA simulator.
"""

from .admm import AdmmConfig, AdmmState, restore_feasibility, run_admm
from .alloc import AllocationResult, allocation_certificate_gap, solve_allocation
from .backends import AnnealConfig, QuboSolverResult, solve_anneal, solve_exhaustive, solve_qubo
from .exact import enumerate_solve
from .instance import (
    GenConfig,
    ProblemInstance,
    Topology,
    generate_instance,
    generate_topology,
    load_instance,
    restrict_areas,
    save_instance,
    shortest_path_delays,
)
from .model import CostBreakdown, Solution, check_feasibility, total_objective
from .qaoa import QaoaConfig, QaoaParams, solve_qaoa
from .qubo import BudgetConfig, IsingModel, Qubo, build_z_subproblem_qubo, qubo_eval, qubo_to_ising

__version__ = "0.1.0"
