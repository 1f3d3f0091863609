"""Statevector QAOA simulator, exposed as a QUBO backend.

The cost Hamiltonian is diagonal in the computational basis: its action
on basis state |j> is multiplication by the QUBO energy of bitstring j.
One layer applies the cost phase exp(-i * gamma * E_j) followed by the
transverse mixer exp(-i * alpha * X) on every qubit. Angles are tuned by
multi-start Nelder-Mead on the exact (shot-noise-free) expectation, and
only the final answer is sampled, mirroring the hardware workflow.

Bit order: qubit i is bit (j >> i) & 1 of basis index j, matching the
QUBO variable indexing everywhere else in the package.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .backends import QuboSolverResult, energy_spectrum, index_to_bits
from .errors import CapacityError, ParameterError
from .qubo import Qubo, qubo_eval

MAX_QUBITS = 20  # dense complex128 statevector stays <= 16 MiB


@dataclass(frozen=True)
class QaoaParams:
    """Per-layer angles: cost_angles scale the cost phase, mixer_angles the mixer."""

    cost_angles: Tuple[float, ...]
    mixer_angles: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.cost_angles) != len(self.mixer_angles) or not self.cost_angles:
            raise ParameterError("need equal, nonzero numbers of cost and mixer angles")

    @property
    def depth(self) -> int:
        return len(self.cost_angles)


@dataclass(frozen=True)
class QaoaConfig:
    depth: int = 3
    shots: int = 1024
    restarts: int = 5
    xatol: float = 1e-4
    max_evals_per_layer: int = 200

    def __post_init__(self) -> None:
        if self.depth < 1 or self.shots < 1 or self.restarts < 1:
            raise ParameterError("depth, shots, and restarts must all be >= 1")


def init_uniform_state(n_qubits: int) -> np.ndarray:
    """|+...+>: every amplitude 2^(-n/2)."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise CapacityError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    size = 1 << n_qubits
    return np.full(size, 1.0 / np.sqrt(size), dtype=np.complex128)


def apply_cost_phase(state: np.ndarray, spectrum: np.ndarray, gamma: float) -> np.ndarray:
    """Diagonal unitary: amplitude j picks up phase -gamma * E_j."""
    if state.shape != spectrum.shape:
        raise ParameterError(f"state size {state.shape} != spectrum size {spectrum.shape}")
    return kernels.phase_apply(state, spectrum, gamma)


def apply_mixer(state: np.ndarray, alpha: float) -> np.ndarray:
    """exp(-i * alpha * X) on each qubit: (a, b) -> (a cos - i b sin, b cos - i a sin)."""
    n_qubits = int(np.log2(state.size))
    if 1 << n_qubits != state.size:
        raise ParameterError(f"state size {state.size} is not a power of two")
    return kernels.mixer_apply(state, alpha, n_qubits)


def evaluate_expectation(state: np.ndarray, spectrum: np.ndarray) -> float:
    """sum_j |amp_j|^2 E_j."""
    if state.shape != spectrum.shape:
        raise ParameterError(f"state size {state.shape} != spectrum size {spectrum.shape}")
    return kernels.expectation(state, spectrum)


def run_circuit(spectrum: np.ndarray, params: QaoaParams) -> np.ndarray:
    """Full ansatz from the uniform state."""
    n_qubits = int(np.log2(spectrum.size))
    state = init_uniform_state(n_qubits)
    for gamma, alpha in zip(params.cost_angles, params.mixer_angles):
        state = kernels.phase_apply(state, spectrum, gamma)
        state = kernels.mixer_apply(state, alpha, n_qubits)
    return state


def optimize_parameters(
    qubo: Qubo, depth: int, config: QaoaConfig = QaoaConfig(), seed: int = 0
) -> Tuple[QaoaParams, float]:
    """Multi-start Nelder-Mead over the 2 * depth angles.

    The first start is all zeros (the uniform state), so the optimized
    expectation never exceeds the uniform-state average. Deterministic
    given the seed.
    """
    if depth < 1:
        raise ParameterError("depth must be >= 1")
    spectrum = energy_spectrum(qubo)
    max_evals = config.max_evals_per_layer * depth

    def objective(angles: np.ndarray) -> float:
        params = QaoaParams(tuple(angles[:depth]), tuple(angles[depth:]))
        return evaluate_expectation(run_circuit(spectrum, params), spectrum)

    rng = np.random.default_rng(seed)
    starts = [np.zeros(2 * depth)]
    for _ in range(config.restarts - 1):
        starts.append(rng.uniform(0.0, np.pi, size=2 * depth))

    best_angles = starts[0]
    best_value = objective(starts[0])
    for start in starts:
        res = minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={"xatol": config.xatol, "fatol": 1e-10, "maxfev": max_evals},
        )
        if res.fun < best_value:
            best_value = float(res.fun)
            best_angles = np.asarray(res.x)
    params = QaoaParams(tuple(best_angles[:depth]), tuple(best_angles[depth:]))
    return params, float(best_value)


def sample_bitstrings(state: np.ndarray, shots: int, seed: int = 0) -> np.ndarray:
    """(shots, n_qubits) array of i.i.d. measurement outcomes; seeded."""
    if shots < 1:
        raise ParameterError("shots must be >= 1")
    n_qubits = int(np.log2(state.size))
    probs = (state.real**2 + state.imag**2).astype(np.float64)
    probs = np.maximum(probs, 0.0)
    probs /= probs.sum()
    rng = np.random.default_rng(seed)
    indices = rng.choice(state.size, size=shots, p=probs)
    out = np.empty((shots, n_qubits), dtype=np.int8)
    for i in range(n_qubits):
        out[:, i] = (indices >> i) & 1
    return out


def solve_qaoa(qubo: Qubo, config: QaoaConfig = QaoaConfig(), seed: int = 0) -> QuboSolverResult:
    """Optimize angles, sample the final state, return the best sampled bitstring."""
    if qubo.num_vars > MAX_QUBITS:
        raise CapacityError(
            f"{qubo.num_vars} qubits exceed the statevector limit {MAX_QUBITS}"
        )
    if qubo.num_vars < 1:
        raise ParameterError("QUBO has no variables")
    t0 = time.perf_counter()
    params, _ = optimize_parameters(qubo, config.depth, config, seed)
    spectrum = energy_spectrum(qubo)
    state = run_circuit(spectrum, params)
    sample_seed = int(np.random.SeedSequence(seed, spawn_key=(1,)).generate_state(1)[0])
    samples = sample_bitstrings(state, config.shots, sample_seed)
    # unique indices only; energies re-evaluated through the QUBO itself
    indices = np.unique(samples @ (1 << np.arange(qubo.num_vars, dtype=np.int64)))
    best_bits = None
    best_energy = np.inf
    for idx in indices:
        bits = index_to_bits(int(idx), qubo.num_vars)
        e = qubo_eval(qubo, bits)
        if e < best_energy:
            best_energy = e
            best_bits = bits
    return QuboSolverResult(
        best_bitstring=best_bits,
        best_energy=best_energy,
        samples_evaluated=config.shots,
        backend_name="qaoa",
        wall_time=time.perf_counter() - t0,
    )


def dump_diagnostics(qubo: Qubo, params: QaoaParams, sink) -> None:
    """Write spectrum, final amplitudes, and angles as JSON for plotting."""
    import json
    import os

    spectrum = energy_spectrum(qubo)
    state = run_circuit(spectrum, params)
    doc = {
        "num_vars": qubo.num_vars,
        "cost_angles": list(params.cost_angles),
        "mixer_angles": list(params.mixer_angles),
        "spectrum": spectrum.tolist(),
        "amplitudes_real": state.real.tolist(),
        "amplitudes_imag": state.imag.tolist(),
    }
    text = json.dumps(doc)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sink.write(text)
