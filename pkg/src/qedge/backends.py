"""Classical QUBO solvers behind the common backend interface.

Every backend consumes a Qubo and returns a QuboSolverResult whose energy
is re-evaluated from the returned bitstring, never copied from internal
bookkeeping. The QAOA simulator registers under the same interface via
solve_qubo(..., backend="qaoa").
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import kernels
from .errors import CapacityError, ParameterError
from .qubo import Qubo, qubo_eval

EXHAUSTIVE_MAX_VARS = 24
BACKEND_NAMES = ("exhaustive", "anneal", "qaoa")


@dataclass(frozen=True)
class QuboSolverResult:
    best_bitstring: Tuple[int, ...]
    best_energy: float
    samples_evaluated: int
    backend_name: str
    wall_time: float
    trace: Optional[Tuple[float, ...]] = None  # best-seen energy trajectory, if tracked

    def as_array(self) -> np.ndarray:
        return np.array(self.best_bitstring, dtype=np.int8)


def index_to_bits(index: int, n_vars: int) -> Tuple[int, ...]:
    """Bit i of the basis index is variable i (least significant first)."""
    return tuple((index >> i) & 1 for i in range(n_vars))


def bits_to_index(bits) -> int:
    return int(sum(int(b) << i for i, b in enumerate(bits)))


def energy_spectrum(qubo: Qubo) -> np.ndarray:
    """Energies of all 2^num_vars bitstrings indexed by basis index."""
    rows, cols, vals = qubo.off_diagonal()
    return kernels.qubo_spectrum(qubo.num_vars, qubo.offset, qubo.diagonal(), rows, cols, vals)


def _lex_smallest(indices: np.ndarray, n_vars: int) -> int:
    """Index whose bitstring (b0, b1, ...) is lexicographically smallest."""
    rev = np.zeros_like(indices)
    for i in range(n_vars):
        rev = (rev << 1) | ((indices >> i) & 1)
    return int(indices[np.argmin(rev)])


def solve_exhaustive(qubo: Qubo) -> QuboSolverResult:
    """Global minimizer by full enumeration; ties go to the lexicographically
    smallest bitstring."""
    if qubo.num_vars > EXHAUSTIVE_MAX_VARS:
        raise CapacityError(
            f"{qubo.num_vars} variables exceed the exhaustive limit {EXHAUSTIVE_MAX_VARS}"
        )
    if qubo.num_vars == 0:
        raise ParameterError("QUBO has no variables")
    t0 = time.perf_counter()
    energies = energy_spectrum(qubo)
    ties = np.flatnonzero(energies == energies.min())
    best_idx = _lex_smallest(ties, qubo.num_vars)
    bits = index_to_bits(best_idx, qubo.num_vars)
    return QuboSolverResult(
        best_bitstring=bits,
        best_energy=qubo_eval(qubo, bits),
        samples_evaluated=int(energies.size),
        backend_name="exhaustive",
        wall_time=time.perf_counter() - t0,
    )


@dataclass(frozen=True)
class AnnealConfig:
    """Metropolis single-flip annealing schedule.

    t_start defaults to the largest coefficient magnitude and t_end to
    1e-3 of it; temperature decays geometrically over sweeps_per_var *
    num_vars sweeps of num_vars proposed flips each.
    """

    t_start: Optional[float] = None
    t_end: Optional[float] = None
    sweeps_per_var: int = 200

    def resolve(self, qubo: Qubo) -> Tuple[float, float, int]:
        scale = max((abs(v) for v in qubo.coeffs.values()), default=1.0)
        t_start = self.t_start if self.t_start is not None else max(scale, 1e-12)
        t_end = self.t_end if self.t_end is not None else 1e-3 * t_start
        if not (t_start > t_end > 0):
            raise ParameterError(f"invalid schedule: t_start={t_start}, t_end={t_end}")
        n_sweeps = self.sweeps_per_var * qubo.num_vars
        if n_sweeps < 1:
            raise ParameterError("schedule must contain at least one sweep")
        return t_start, t_end, n_sweeps


def solve_anneal(qubo: Qubo, config: AnnealConfig = AnnealConfig(), seed: int = 0) -> QuboSolverResult:
    """Simulated annealing; deterministic given the seed; returns best seen."""
    if qubo.num_vars < 1:
        raise ParameterError("QUBO has no variables")
    t_start, t_end, n_sweeps = config.resolve(qubo)
    t0 = time.perf_counter()
    n = qubo.num_vars
    rng = np.random.default_rng(seed)

    diag = qubo.diagonal()
    sym = np.zeros((n, n))
    for (i, j), v in qubo.coeffs.items():
        if i != j:
            sym[i, j] += v
            sym[j, i] += v

    bits = rng.integers(0, 2, size=n).astype(np.float64)
    energy = qubo_eval(qubo, bits.astype(int))
    best_bits = bits.copy()
    best_energy = energy
    trace = [best_energy]
    ratio = (t_end / t_start) ** (1.0 / max(n_sweeps - 1, 1))
    temp = t_start
    evaluated = 1
    for _ in range(n_sweeps):
        flips = rng.integers(0, n, size=n)
        accept_draws = rng.random(size=n)
        for k, r in zip(flips, accept_draws):
            delta = (1.0 - 2.0 * bits[k]) * (diag[k] + float(sym[k] @ bits))
            evaluated += 1
            if delta <= 0.0 or r < np.exp(-delta / temp):
                bits[k] = 1.0 - bits[k]
                energy += delta
                if energy < best_energy - 1e-15:
                    best_energy = energy
                    best_bits = bits.copy()
        trace.append(best_energy)
        temp *= ratio
    final = tuple(int(b) for b in best_bits)
    return QuboSolverResult(
        best_bitstring=final,
        best_energy=qubo_eval(qubo, final),
        samples_evaluated=evaluated,
        backend_name="anneal",
        wall_time=time.perf_counter() - t0,
        trace=tuple(trace),
    )


def solve_qubo(qubo: Qubo, backend: str, config=None, seed: int = 0) -> QuboSolverResult:
    """Dispatch to a named backend: exhaustive, anneal, or qaoa."""
    if backend == "exhaustive":
        return solve_exhaustive(qubo)
    if backend == "anneal":
        return solve_anneal(qubo, config or AnnealConfig(), seed)
    if backend == "qaoa":
        from .qaoa import QaoaConfig, solve_qaoa

        return solve_qaoa(qubo, config or QaoaConfig(), seed)
    raise ParameterError(f"unknown backend {backend!r}; expected one of {BACKEND_NAMES}")
